#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

#include <cstring>
#include <istream>

namespace evo {

namespace {
constexpr char kMagic[4] = {'E', 'V', 'O', 'S'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void Optimizer::save(std::ostream& os) const {
  BinaryWriter w(os);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(kind()));
  w.u64(static_cast<std::uint64_t>(dim_));
  w.u64(static_cast<std::uint64_t>(t_));
  w.u64(static_cast<std::uint64_t>(population_));
  w.u64(rng_.state());
  w.u32(pending_ ? 1 : 0);
  if (pending_) w.batch(last_);
  save_payload(w);
}

std::unique_ptr<Optimizer> load_optimizer(std::istream& is) {
  BinaryReader r(is);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::CorruptData, "not an optimizer snapshot");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw Error(Errc::CorruptData, "unsupported snapshot version " + std::to_string(version));
  const auto kind = static_cast<OptimizerKind>(r.u32());
  const auto dim = r.u64();
  const auto t = r.u64();
  const auto pop = r.u64();
  if (dim == 0 || dim > (1u << 24) || pop == 0 || pop > (1u << 24)) throw Error(Errc::CorruptData, "bad snapshot header");

  std::unique_ptr<Optimizer> opt;
  switch (kind) {
    case OptimizerKind::SphereCMA: opt.reset(new SphereCMA()); break;
    case OptimizerKind::CholeskyCMA: opt.reset(new CholeskyCMA()); break;
    case OptimizerKind::DiagonalCMA: opt.reset(new DiagonalCMA()); break;
    case OptimizerKind::GA: opt.reset(new GeneticAlgorithm()); break;
    case OptimizerKind::RandomSearch: opt.reset(new RandomSearch()); break;
    default: throw Error(Errc::CorruptData, "unknown optimizer kind");
  }
  opt->dim_ = static_cast<int>(dim);
  opt->population_ = static_cast<int>(pop);
  opt->t_ = static_cast<int>(t);
  opt->rng_.set_state(r.u64());
  opt->pending_ = r.u32() != 0;
  if (opt->pending_) opt->last_ = r.batch();
  opt->load_payload(r);
  return opt;
}

}  // namespace evo

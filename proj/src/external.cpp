#include "evo/objectives.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace evo {

using json = nlohmann::json;

namespace {

void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "cannot encode a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string encode_eval_request(int gen, const Batch& codes) {
  std::string s = "{\"type\":\"eval\",\"gen\":" + std::to_string(gen) + ",\"codes\":[";
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    if (i) s += ',';
    s += '[';
    for (Eigen::Index j = 0; j < codes.cols(); ++j) {
      if (j) s += ',';
      append_double(s, codes(i, j));
    }
    s += ']';
  }
  s += "]}";
  return s;
}

std::string encode_scores(int gen, const std::vector<double>& scores) {
  std::string s = "{\"type\":\"scores\",\"gen\":" + std::to_string(gen) + ",\"scores\":[";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i) s += ',';
    append_double(s, scores[i]);
  }
  s += "]}";
  return s;
}

// ------------------------------------------------------------ subprocess

SubprocessTransport::SubprocessTransport(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(Errc::InvalidArgument, "empty peer command");
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(Errc::IoError, std::strerror(errno));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(Errc::IoError, std::strerror(errno));
  }
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  pid_ = fork();
  if (pid_ < 0) throw Error(Errc::IoError, "fork failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessTransport::~SubprocessTransport() { close(); }

void SubprocessTransport::send(const std::string& line) {
  if (to_child_ < 0) throw Error(Errc::PeerCrash, "transport is closed");
  std::string msg = line + "\n";
  std::size_t off = 0;
  while (off < msg.size()) {
    const ssize_t n = ::write(to_child_, msg.data() + off, msg.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::PeerCrash, std::string("write to peer failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string SubprocessTransport::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (from_child_ < 0) throw Error(Errc::PeerCrash, "transport is closed");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(Errc::PeerTimeout, "no reply within " + std::to_string(timeout.count()) + " ms");
    pollfd p{from_child_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::IoError, std::strerror(errno));
    }
    if (rc == 0) continue;
    char buf[65536];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::PeerCrash, std::strerror(errno));
    }
    if (n == 0) throw Error(Errc::PeerCrash, "peer closed its output");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

void SubprocessTransport::close() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give the peer a moment to exit after stdin closes, then force it.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

// ------------------------------------------------------------ loopback

void LoopbackTransport::send(const std::string& line) {
  if (crashed_) throw Error(Errc::PeerCrash, "peer has crashed");
  ++sent_;
  try {
    if (auto reply = peer_(line)) inbox_.push_back(*reply);
  } catch (...) {
    crashed_ = true;
  }
}

std::string LoopbackTransport::receive(std::chrono::milliseconds) {
  if (!inbox_.empty()) {
    std::string s = inbox_.front();
    inbox_.erase(inbox_.begin());
    return s;
  }
  if (crashed_) throw Error(Errc::PeerCrash, "peer has crashed");
  throw Error(Errc::PeerTimeout, "peer did not reply");
}

// ------------------------------------------------------------ objective

ExternalObjective::ExternalObjective(std::unique_ptr<Transport> transport, int dim, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), dim_(dim), timeout_(timeout) {
  if (!transport_) throw Error(Errc::InvalidArgument, "null transport");
  if (dim < 1) throw Error(Errc::InvalidArgument, "dimension must be positive");
  transport_->send(json{{"type", "hello"}, {"dim", dim}}.dump());
  const std::string reply = transport_->receive(timeout_);
  json j;
  try {
    j = json::parse(reply);
  } catch (const json::exception&) {
    throw Error(Errc::ProtocolError, "handshake reply is not JSON");
  }
  if (!j.is_object() || j.value("type", std::string{}) != "ready")
    throw Error(Errc::ProtocolError, "expected a ready message");
  open_ = true;
}

ExternalObjective::~ExternalObjective() {
  try {
    shutdown();
  } catch (...) {
  }
}

void ExternalObjective::shutdown() {
  if (!open_) return;
  open_ = false;
  transport_->send(R"({"type":"bye"})");
  transport_->close();
}

std::vector<ScoreRecord> ExternalObjective::evaluate(const Batch& codes, int gen) {
  if (!open_) throw Error(Errc::ProtocolViolation, "external objective is shut down");
  if (codes.cols() != dim_) throw Error(Errc::DimensionMismatch, "code length differs from objective dimension");
  transport_->send(encode_eval_request(gen, codes));
  ++requests_;
  const std::string reply = transport_->receive(timeout_);
  json j;
  try {
    j = json::parse(reply);
  } catch (const json::exception&) {
    throw Error(Errc::ProtocolError, "reply is not JSON");
  }
  if (!j.is_object()) throw Error(Errc::ProtocolError, "reply is not an object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string() || *type != "scores") throw Error(Errc::ProtocolError, "reply type is not scores");
  const auto g = j.find("gen");
  if (g == j.end() || !g->is_number_integer() || g->get<long long>() != gen)
    throw Error(Errc::ProtocolError, "reply does not echo gen " + std::to_string(gen));
  const auto sc = j.find("scores");
  if (sc == j.end() || !sc->is_array()) throw Error(Errc::ProtocolError, "reply has no score array");
  if (static_cast<Eigen::Index>(sc->size()) != codes.rows())
    throw Error(Errc::ProtocolError, "expected " + std::to_string(codes.rows()) + " scores, got " + std::to_string(sc->size()));
  std::vector<ScoreRecord> out;
  out.reserve(sc->size());
  for (const auto& v : *sc) {
    if (!v.is_number()) throw Error(Errc::ProtocolError, "score is not a number");
    const double s = v.get<double>();
    if (!std::isfinite(s)) throw Error(Errc::ProtocolError, "score is not finite");
    out.push_back({s, s, s});
  }
  return out;
}

std::unique_ptr<Objective> external_objective(std::unique_ptr<Transport> transport, int dim) {
  return std::make_unique<ExternalObjective>(std::move(transport), dim);
}

// ------------------------------------------------------------ sample peer

bool sample_peer_step(const std::string& line, std::string& reply) {
  reply.clear();
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    reply = R"({"type":"error","message":"unparseable request"})";
    return true;
  }
  const std::string type = j.is_object() ? j.value("type", std::string{}) : std::string{};
  if (type == "hello") {
    reply = R"({"type":"ready"})";
  } else if (type == "eval") {
    std::vector<double> scores;
    for (const auto& code : j.at("codes")) scores.push_back(code.empty() ? 0.0 : code.at(0).get<double>());
    reply = encode_scores(j.at("gen").get<int>(), scores);
  } else if (type == "bye") {
    return false;
  } else {
    reply = R"({"type":"error","message":"unknown message type"})";
  }
  return true;
}

int run_sample_peer(std::istream& in, std::ostream& out) {
  std::string line, reply;
  while (std::getline(in, line)) {
    if (!sample_peer_step(line, reply)) return 0;
    out << reply << '\n' << std::flush;
  }
  return 0;
}

}  // namespace evo

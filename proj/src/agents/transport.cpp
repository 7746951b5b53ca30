#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <httplib.h>

#include "netbench/agents/agents.hpp"
#include "netbench/agents/extract.hpp"
#include "netbench/core/error.hpp"

namespace netbench::agents {

AgentReply ExternalAgent::next(const QuerySpec& query, const Observation& observation) {
  AgentReply reply;
  if (fatal_) {
    reply.error = "TransportError: " + *fatal_;
    return reply;
  }
  const std::string request =
      nlohmann::json{{"query_id", query.id}, {"prompt", render_prompt(query.app, query, observation, style_)}}.dump();
  try {
    return extract_message(exchange(request));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTimeout) fatal_ = e.what();
    reply.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  return reply;
}

ExecAgent::ExecAgent(const std::string& command, std::chrono::milliseconds timeout, PromptStyle style)
    : ExternalAgent(timeout, style) {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw Error(ErrorCode::kTransportError, std::string("socketpair: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw Error(ErrorCode::kTransportError, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(fds[1], STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(fds[1]);
  pid_ = pid;
  to_child_ = from_child_ = fds[0];
}

ExecAgent::~ExecAgent() {
  if (to_child_ >= 0) ::close(to_child_);
  if (pid_ > 0) {
    kill(pid_, SIGTERM);
    waitpid(pid_, nullptr, 0);
  }
}

std::string ExecAgent::exchange(const std::string& request_line) {
  if (pid_ <= 0) throw Error(ErrorCode::kTransportError, "agent process is not running");
  const std::string line = request_line + "\n";
  for (std::size_t sent = 0; sent < line.size();) {
    const ssize_t n = send(to_child_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kTransportError, std::string("write to agent: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return reply;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
      throw Error(ErrorCode::kTimeout, "agent gave no reply within " + std::to_string(timeout_.count()) + " ms");
    }
    pollfd p{from_child_, POLLIN, 0};
    const int ready = poll(&p, 1, static_cast<int>(std::min<std::int64_t>(left.count(), 1 << 30)));
    if (ready < 0 && errno != EINTR) throw Error(ErrorCode::kTransportError, std::strerror(errno));
    if (ready <= 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      if (!buffer_.empty()) {
        std::string reply;
        reply.swap(buffer_);
        return reply;
      }
      throw Error(ErrorCode::kTransportError, "agent process closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

HttpAgent::HttpAgent(const std::string& url, std::chrono::milliseconds timeout, PromptStyle style)
    : ExternalAgent(timeout, style) {
  if (url.rfind("http://", 0) != 0) throw Error(ErrorCode::kInvalidConfig, "only http:// endpoints are supported");
  const auto slash = url.find('/', 7);
  origin_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::string HttpAgent::exchange(const std::string& request_line) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const auto res = client.Post(path_, request_line, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::kTimeout, "agent endpoint did not answer: " + httplib::to_string(err));
    }
    throw Error(ErrorCode::kTransportError, "agent endpoint unreachable: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kTransportError, "agent endpoint returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace netbench::agents

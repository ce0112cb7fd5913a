/*
 * Copyright 2026 The rex3d Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rex3d/external_oracle.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "rex3d/errors.h"

namespace rex3d {
namespace {

using Clock = std::chrono::steady_clock;

class ExternalOracle final : public Oracle {
 public:
  ExternalOracle(std::string command, Dims dims, ExternalOracleOptions options)
      : command_(std::move(command)), dims_(dims), options_(options) {
    Spawn();
    try {
      Handshake();
    } catch (...) {
      Shutdown(false);
      throw;
    }
  }

  ~ExternalOracle() override { Shutdown(true); }

  std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) override {
    if (to_child_ < 0) throw OracleUnavailable("adapter channel is closed");
    for (const VoxelGrid& v : batch) {
      if (v.dims() != dims_) {
        throw InvalidArgument("volume dims " + v.dims().ToString() +
                              " differ from handshake dims " + dims_.ToString());
      }
    }
    const int64_t id = next_id_++;
    const auto deadline = Clock::now() + options_.timeout;
    const nlohmann::json header = {{"id", id}, {"count", batch.size()}};
    WriteAll(header.dump() + "\n", deadline);
    std::vector<char> payload(static_cast<size_t>(dims_.VoxelCount()) * 4);
    for (const VoxelGrid& v : batch) {
      EncodeLittleEndian(v, payload);
      WriteAll(std::string_view(payload.data(), payload.size()), deadline);
    }

    const std::string line = ReadLine(deadline);
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("malformed adapter reply: " + line);
    }
    if (!reply.is_object()) throw ProtocolError("malformed adapter reply: " + line);
    if (reply.contains("error")) {
      throw OracleError("adapter reported an error: " + reply["error"].dump());
    }
    try {
      if (reply.at("id").get<int64_t>() != id) {
        throw ProtocolError("reply id mismatch, expected " + std::to_string(id) +
                            ": " + line);
      }
      const auto& labels = reply.at("labels");
      const auto& confidences = reply.at("confidences");
      if (!labels.is_array() || !confidences.is_array() ||
          labels.size() != batch.size() || confidences.size() != batch.size()) {
        throw ProtocolError("reply does not carry " + std::to_string(batch.size()) +
                            " labels and confidences: " + line);
      }
      std::vector<OracleVerdict> out(batch.size());
      for (size_t i = 0; i < batch.size(); ++i) {
        if (!labels[i].is_number_integer() || !confidences[i].is_number()) {
          throw ProtocolError("non-numeric verdict in reply: " + line);
        }
        out[i] = {labels[i].get<int>(), confidences[i].get<double>()};
        if (!(out[i].confidence >= 0.0 && out[i].confidence <= 1.0)) {
          throw ProtocolError("confidence outside [0,1] in reply: " + line);
        }
      }
      return out;
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("malformed adapter reply: " + line);
    }
  }

  bool IsConcurrent() const override { return false; }

  std::string Describe() const override { return "cmd:" + command_; }

 private:
  static void EncodeLittleEndian(const VoxelGrid& v, std::vector<char>& out) {
    const auto data = v.data();
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), data.data(), out.size());
    } else {
      for (size_t i = 0; i < data.size(); ++i) {
        const uint32_t bits = std::bit_cast<uint32_t>(data[i]);
        for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<char>(bits >> (8 * b));
      }
    }
  }

  void Spawn() {
    // A dead adapter must surface as EPIPE, not kill the process.
    struct sigaction current {};
    sigaction(SIGPIPE, nullptr, &current);
    if (current.sa_handler == SIG_DFL) signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0) throw OracleUnavailable("pipe failed");
    if (pipe2(out_pipe, O_CLOEXEC) != 0) {
      close(in_pipe[0]);
      close(in_pipe[1]);
      throw OracleUnavailable("pipe failed");
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
      throw OracleUnavailable("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      signal(SIGPIPE, SIG_DFL);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    fcntl(to_child_, F_SETFL, fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  }

  void Handshake() {
    const auto deadline = Clock::now() + options_.timeout;
    const nlohmann::json hello = {{"proto", 1},
                                  {"shape", {dims_.x, dims_.y, dims_.z}},
                                  {"dtype", "f32le"}};
    WriteAll(hello.dump() + "\n", deadline);
    const std::string line = ReadLine(deadline);
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("malformed handshake reply: " + line);
    }
    if (!reply.is_object() || !reply.contains("ok") || !reply["ok"].is_boolean()) {
      throw ProtocolError("malformed handshake reply: " + line);
    }
    if (!reply["ok"].get<bool>()) {
      throw ProtocolError("adapter rejected handshake: " +
                          (reply.contains("error") ? reply["error"].dump() : line));
    }
    if (reply.value("proto", 0) != 1) {
      throw ProtocolError("unsupported protocol version in reply: " + line);
    }
  }

  int RemainingMs(Clock::time_point deadline) const {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return static_cast<int>(std::max<int64_t>(left.count(), 0));
  }

  void WriteAll(std::string_view bytes, Clock::time_point deadline) {
    size_t done = 0;
    while (done < bytes.size()) {
      pollfd pfd{to_child_, POLLOUT, 0};
      const int ready = poll(&pfd, 1, RemainingMs(deadline));
      if (ready == 0) throw OracleTimeout("adapter did not accept input in time");
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw OracleUnavailable("poll failed: " + std::string(std::strerror(errno)));
      }
      const ssize_t n = write(to_child_, bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        if (errno == EAGAIN || errno == EINTR) continue;
        throw OracleUnavailable("adapter closed its input: " +
                                std::string(std::strerror(errno)));
      }
      done += static_cast<size_t>(n);
    }
  }

  std::string ReadLine(Clock::time_point deadline) {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      pollfd pfd{from_child_, POLLIN, 0};
      const int ready = poll(&pfd, 1, RemainingMs(deadline));
      if (ready == 0) throw OracleTimeout("adapter did not reply in time");
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw OracleUnavailable("poll failed: " + std::string(std::strerror(errno)));
      }
      char chunk[4096];
      const ssize_t n = read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw OracleUnavailable("read failed: " + std::string(std::strerror(errno)));
      }
      if (n == 0) throw OracleUnavailable("adapter exited before replying");
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }

  void Shutdown(bool polite) {
    if (to_child_ >= 0) {
      if (polite) {
        try {
          WriteAll("{\"id\":-1}\n", Clock::now() + std::chrono::seconds(2));
        } catch (const Error&) {
        }
      }
      close(to_child_);
      to_child_ = -1;
    }
    if (from_child_ >= 0) {
      close(from_child_);
      from_child_ = -1;
    }
    if (pid_ > 0) {
      const auto deadline = Clock::now() + std::chrono::seconds(polite ? 2 : 0);
      int status = 0;
      while (waitpid(pid_, &status, WNOHANG) == 0) {
        if (Clock::now() >= deadline) {
          kill(pid_, SIGKILL);
          waitpid(pid_, &status, 0);
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      pid_ = -1;
    }
  }

  std::string command_;
  Dims dims_;
  ExternalOracleOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  int64_t next_id_ = 0;
};

}  // namespace

std::unique_ptr<Oracle> SpawnExternalOracle(const std::string& command, Dims dims,
                                            ExternalOracleOptions options) {
  return std::make_unique<ExternalOracle>(command, dims, options);
}

}  // namespace rex3d

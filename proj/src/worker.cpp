#include "unitask/worker.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

namespace unitask {

Message Worker::handle(const Message& request) {
  try {
    return std::visit([this](const auto& m) { return on(m); }, request);
  } catch (const Error& e) {
    return Failure{e.code(), e.what()};
  } catch (const std::exception& e) {
    return Failure{ErrorCode::IterationFailed, e.what()};
  }
}

std::size_t Worker::local_samples() const {
  std::size_t n = 0;
  for (const auto& c : chunks_) n += c.size();
  return n;
}

Message Worker::on(const StartIteration& m) {
  contract_.begin_iteration();
  LocalUpdate update;
  const std::size_t local = local_samples();
  if (local == 0) {
    update.delta_weights.assign(model_.weights.size(), 0.0);
  } else if (m.hp.loss == Loss::Hinge) {
    dual_snapshot_.clear();
    for (const auto& c : chunks_) dual_snapshot_.push_back(c.dual_state);
    const std::size_t steps = m.steps == 0 ? local : m.steps;
    update = scd_local_solve(chunks_, model_, m.hp, m.n_total, steps, m.seed);
  } else {
    update = sgd_local_solve(chunks_, model_, m.hp, m.seed);
    update.samples_processed = std::min(update.samples_processed, local);
  }
  update.worker = id_;
  update.iteration = m.iteration;
  return IterationFinished{std::move(update)};
}

Message Worker::on(const CommitDuals& m) {
  contract_.require(OwnershipPhase::TaskOwned, "CommitDuals");
  if (dual_snapshot_.size() != chunks_.size()) return Ack{};
  for (std::size_t c = 0; c < chunks_.size(); ++c) {
    auto& state = chunks_[c].dual_state;
    const auto& before = dual_snapshot_[c];
    for (std::size_t i = 0; i < state.size(); ++i) {
      state[i] = std::clamp(before[i] + m.scale * (state[i] - before[i]), 0.0, 1.0);
    }
  }
  dual_snapshot_.clear();
  return Ack{};
}

Message Worker::on(const EndIteration&) {
  contract_.end_iteration();
  dual_snapshot_.clear();
  return Ack{};
}

Message Worker::on(const BroadcastModel& m) {
  model_ = m.model;
  return Ack{};
}

Message Worker::on(const FetchModel&) { return ModelSnapshot{model_}; }

Message Worker::on(const AddChunks& m) {
  contract_.require(OwnershipPhase::SchedulerOwned, "AddChunks");
  for (const auto& incoming : m.chunks) {
    const bool duplicate = std::any_of(chunks_.begin(), chunks_.end(), [&](const DataChunk& c) { return c.id == incoming.id; });
    if (duplicate) throw Error(ErrorCode::InvalidMove, "chunk " + std::to_string(incoming.id) + " already held");
  }
  chunks_.insert(chunks_.end(), m.chunks.begin(), m.chunks.end());
  std::sort(chunks_.begin(), chunks_.end(), [](const DataChunk& a, const DataChunk& b) { return a.id < b.id; });
  return Ack{};
}

Message Worker::on(const RemoveChunks& m) {
  contract_.require(OwnershipPhase::SchedulerOwned, "RemoveChunks");
  std::set<ChunkId> wanted(m.chunks.begin(), m.chunks.end());
  for (ChunkId id : wanted) {
    const bool held = std::any_of(chunks_.begin(), chunks_.end(), [&](const DataChunk& c) { return c.id == id; });
    if (!held) throw Error(ErrorCode::InvalidMove, "chunk " + std::to_string(id) + " not held by worker " + std::to_string(id_));
  }
  ChunksPayload out;
  std::vector<DataChunk> kept;
  for (auto& c : chunks_) {
    if (wanted.contains(c.id)) {
      out.chunks.push_back(std::move(c));
    } else {
      kept.push_back(std::move(c));
    }
  }
  chunks_ = std::move(kept);
  return out;
}

Message Worker::on(const FetchChunks&) { return ChunksPayload{chunks_}; }

Message Worker::on(const QueryGapTerms&) { return GapTermsReply{gap_terms(chunks_, model_.weights)}; }

Message Worker::on(const Shutdown&) { return Ack{}; }

template <typename Other>
Message Worker::on(const Other&) {
  throw Error(ErrorCode::ProtocolError, "worker cannot handle this message");
}

namespace {

class InProcessHandle final : public WorkerHandle {
 public:
  explicit InProcessHandle(WorkerId id) : worker_(std::make_unique<Worker>(id)), id_(id) {}

  WorkerId id() const override { return id_; }
  bool alive() const override { return worker_ != nullptr; }

  Message dispatch(const Message& request) override {
    if (!worker_) throw Error(ErrorCode::WorkerUnavailable, "worker " + std::to_string(id_) + " is shut down");
    return worker_->handle(request);
  }

  void shutdown() override { worker_.reset(); }

 private:
  std::unique_ptr<Worker> worker_;
  WorkerId id_;
};

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::recv(fd, data, n, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool send_frame(int fd, const Message& message) {
  const auto bytes = frame_message(message);
  return write_all(fd, bytes.data(), bytes.size());
}

std::optional<Message> receive_frame(int fd) {
  std::uint8_t header[4];
  if (!read_all(fd, header, 4)) return std::nullopt;
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  std::vector<std::uint8_t> body(n);
  if (!read_all(fd, body.data(), n)) return std::nullopt;
  return decode_message(body);
}

// Length-prefixed frames over a stream socket; the worker runs on its own thread.
class SocketHandle final : public WorkerHandle {
 public:
  explicit SocketHandle(WorkerId id) : id_(id) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
      throw Error(ErrorCode::WorkerUnavailable, std::string("socketpair: ") + std::strerror(errno));
    }
    client_fd_ = fds[0];
    server_fd_ = fds[1];
    server_ = std::thread([fd = server_fd_, id] { serve(fd, id); });
  }

  ~SocketHandle() override { shutdown(); }

  WorkerId id() const override { return id_; }
  bool alive() const override { return client_fd_ >= 0; }

  Message dispatch(const Message& request) override {
    std::lock_guard lock(mutex_);
    if (client_fd_ < 0) throw Error(ErrorCode::WorkerUnavailable, "worker " + std::to_string(id_) + " is shut down");
    if (!send_frame(client_fd_, request)) throw Error(ErrorCode::WorkerUnavailable, "send to worker failed");
    auto reply = receive_frame(client_fd_);
    if (!reply) throw Error(ErrorCode::WorkerUnavailable, "worker " + std::to_string(id_) + " closed the connection");
    return std::move(*reply);
  }

  void shutdown() override {
    std::lock_guard lock(mutex_);
    if (client_fd_ < 0) return;
    if (send_frame(client_fd_, Shutdown{})) receive_frame(client_fd_);
    ::close(client_fd_);
    client_fd_ = -1;
    if (server_.joinable()) server_.join();
    ::close(server_fd_);
  }

 private:
  static void serve(int fd, WorkerId id) {
    Worker worker(id);
    while (true) {
      std::optional<Message> request;
      try {
        request = receive_frame(fd);
      } catch (const Error& e) {
        send_frame(fd, Failure{e.code(), e.what()});
        continue;
      }
      if (!request) return;
      const bool stop = std::holds_alternative<Shutdown>(*request);
      if (!send_frame(fd, worker.handle(*request)) || stop) return;
    }
  }

  WorkerId id_;
  int client_fd_ = -1;
  int server_fd_ = -1;
  std::thread server_;
  std::mutex mutex_;
};

}  // namespace

std::unique_ptr<WorkerHandle> spawn_worker(WorkerId id, TransportKind kind) {
  if (kind == TransportKind::Socket) return std::make_unique<SocketHandle>(id);
  return std::make_unique<InProcessHandle>(id);
}

}  // namespace unitask

#pragma once

#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "unitask/core_data.hpp"
#include "unitask/messages.hpp"

namespace unitask {

// The solver side of a uni-task: owns its chunks and a model replica and
// answers requests from the trainer.
class Worker {
 public:
  explicit Worker(WorkerId id) : id_(id) {}

  WorkerId id() const { return id_; }
  // Failures come back as a Failure reply rather than an exception.
  Message handle(const Message& request);

 private:
  Message on(const StartIteration& m);
  Message on(const CommitDuals& m);
  Message on(const EndIteration& m);
  Message on(const BroadcastModel& m);
  Message on(const FetchModel& m);
  Message on(const AddChunks& m);
  Message on(const RemoveChunks& m);
  Message on(const FetchChunks& m);
  Message on(const QueryGapTerms& m);
  Message on(const Shutdown& m);
  template <typename Other>
  Message on(const Other&);

  std::size_t local_samples() const;

  WorkerId id_;
  std::vector<DataChunk> chunks_;  // sorted by id
  Model model_;
  OwnershipContract contract_;
  std::vector<std::vector<double>> dual_snapshot_;
};

enum class TransportKind { InProcess, Socket };

class WorkerHandle {
 public:
  virtual ~WorkerHandle() = default;
  virtual WorkerId id() const = 0;
  // Request/reply. Throws WorkerUnavailable once the worker is gone.
  virtual Message dispatch(const Message& request) = 0;
  virtual void shutdown() = 0;
  virtual bool alive() const = 0;
};

std::unique_ptr<WorkerHandle> spawn_worker(WorkerId id, TransportKind kind);

// dispatch() and unwrap the expected reply, rethrowing Failure replies.
template <typename Reply>
Reply request(WorkerHandle& handle, const Message& message) {
  Message reply = handle.dispatch(message);
  if (auto* failure = std::get_if<Failure>(&reply)) throw Error(failure->code, failure->message);
  if (auto* typed = std::get_if<Reply>(&reply)) return std::move(*typed);
  throw Error(ErrorCode::ProtocolError, "unexpected reply tag " + std::to_string(message_tag(reply)));
}

}  // namespace unitask

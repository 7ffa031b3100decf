#include "unitask/messages.hpp"

#include <bit>
#include <type_traits>

namespace unitask {

namespace {

// All multi-byte fields are big-endian; doubles travel as their IEEE-754 bits.
class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { be(v, 2); }
  void u32(std::uint32_t v) { be(v, 4); }
  void u64(std::uint64_t v) { be(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void doubles(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void be(std::uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const std::uint32_t n = u32();
    need(std::size_t{n} * 8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  void finish() const {
    if (pos_ != in_.size()) throw Error(ErrorCode::ProtocolError, "trailing bytes in message");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::ProtocolError, "truncated message");
  }
  std::uint64_t be(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put(Writer& w, const Sample& s) {
  w.u64(s.id);
  w.f64(s.label);
  w.u32(static_cast<std::uint32_t>(s.features.size()));
  for (const auto& f : s.features) {
    w.u32(f.index);
    w.f64(f.value);
  }
}

Sample get_sample(Reader& r) {
  Sample s;
  s.id = r.u64();
  s.label = r.f64();
  const std::uint32_t nnz = r.u32();
  s.features.reserve(nnz);
  for (std::uint32_t i = 0; i < nnz; ++i) {
    Feature f;
    f.index = r.u32();
    f.value = r.f64();
    s.features.push_back(f);
  }
  return s;
}

void put(Writer& w, const DataChunk& c) {
  w.u64(c.id);
  w.u32(static_cast<std::uint32_t>(c.samples.size()));
  w.u8(c.dual_state.empty() ? 0 : 1);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    put(w, c.samples[i]);
    if (!c.dual_state.empty()) w.f64(c.dual_state[i]);
  }
}

DataChunk get_chunk(Reader& r) {
  DataChunk c;
  c.id = r.u64();
  const std::uint32_t n = r.u32();
  const bool state = r.u8() != 0;
  c.samples.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    c.samples.push_back(get_sample(r));
    if (state) c.dual_state.push_back(r.f64());
  }
  return c;
}

void put(Writer& w, const std::vector<DataChunk>& chunks) {
  w.u32(static_cast<std::uint32_t>(chunks.size()));
  for (const auto& c : chunks) put(w, c);
}

std::vector<DataChunk> get_chunks(Reader& r) {
  std::vector<DataChunk> out(r.u32());
  for (auto& c : out) c = get_chunk(r);
  return out;
}

void put(Writer& w, const Model& m) {
  w.u64(m.iteration);
  w.doubles(m.weights);
}

Model get_model(Reader& r) {
  Model m;
  m.iteration = r.u64();
  m.weights = r.doubles();
  return m;
}

void put_optional(Writer& w, const std::optional<double>& v) {
  w.u8(v ? 1 : 0);
  w.f64(v.value_or(0.0));
}

std::optional<double> get_optional(Reader& r) {
  const bool present = r.u8() != 0;
  const double v = r.f64();
  return present ? std::optional<double>(v) : std::nullopt;
}

void put(Writer& w, const HyperParams& hp) {
  w.u64(hp.L);
  w.u64(hp.H);
  w.f64(hp.base_lr);
  w.f64(hp.momentum);
  put_optional(w, hp.sigma_prime);
  put_optional(w, hp.lambda);
  w.u8(hp.loss == Loss::Hinge ? 0 : 1);
}

HyperParams get_hp(Reader& r) {
  HyperParams hp;
  hp.L = r.u64();
  hp.H = r.u64();
  hp.base_lr = r.f64();
  hp.momentum = r.f64();
  hp.sigma_prime = get_optional(r);
  hp.lambda = get_optional(r);
  hp.loss = r.u8() == 0 ? Loss::Hinge : Loss::Logistic;
  return hp;
}

void put_payload(Writer& w, const StartIteration& m) {
  w.u64(m.iteration);
  w.u64(m.seed);
  put(w, m.hp);
  w.u64(m.n_total);
  w.u64(m.steps);
}
void put_payload(Writer& w, const IterationFinished& m) {
  const auto& u = m.update;
  w.doubles(u.delta_weights);
  w.u64(u.samples_processed);
  w.u32(u.worker);
  w.u64(u.iteration);
  w.u64(u.skipped_zero_norm);
}
void put_payload(Writer& w, const BroadcastModel& m) { put(w, m.model); }
void put_payload(Writer& w, const ModelSnapshot& m) { put(w, m.model); }
void put_payload(Writer& w, const AddChunks& m) { put(w, m.chunks); }
void put_payload(Writer& w, const ChunksPayload& m) { put(w, m.chunks); }
void put_payload(Writer& w, const RemoveChunks& m) {
  w.u32(static_cast<std::uint32_t>(m.chunks.size()));
  for (ChunkId c : m.chunks) w.u64(c);
}
void put_payload(Writer& w, const CommitDuals& m) { w.f64(m.scale); }
void put_payload(Writer& w, const GapTermsReply& m) {
  w.doubles(m.terms.alpha_yx);
  w.f64(m.terms.alpha_sum);
  w.f64(m.terms.hinge_sum);
  w.u64(m.terms.count);
}
void put_payload(Writer& w, const Failure& m) {
  w.u16(static_cast<std::uint16_t>(m.code));
  w.str(m.message);
}
template <typename Empty>
void put_payload(Writer&, const Empty&) {}

template <typename T>
T get_payload(Reader& r);

template <>
StartIteration get_payload(Reader& r) {
  StartIteration m;
  m.iteration = r.u64();
  m.seed = r.u64();
  m.hp = get_hp(r);
  m.n_total = r.u64();
  m.steps = r.u64();
  return m;
}
template <>
IterationFinished get_payload(Reader& r) {
  IterationFinished m;
  m.update.delta_weights = r.doubles();
  m.update.samples_processed = r.u64();
  m.update.worker = r.u32();
  m.update.iteration = r.u64();
  m.update.skipped_zero_norm = r.u64();
  return m;
}
template <>
BroadcastModel get_payload(Reader& r) { return {get_model(r)}; }
template <>
ModelSnapshot get_payload(Reader& r) { return {get_model(r)}; }
template <>
AddChunks get_payload(Reader& r) { return {get_chunks(r)}; }
template <>
ChunksPayload get_payload(Reader& r) { return {get_chunks(r)}; }
template <>
RemoveChunks get_payload(Reader& r) {
  RemoveChunks m;
  m.chunks.resize(r.u32());
  for (auto& c : m.chunks) c = r.u64();
  return m;
}
template <>
CommitDuals get_payload(Reader& r) { return {r.f64()}; }
template <>
GapTermsReply get_payload(Reader& r) {
  GapTermsReply m;
  m.terms.alpha_yx = r.doubles();
  m.terms.alpha_sum = r.f64();
  m.terms.hinge_sum = r.f64();
  m.terms.count = r.u64();
  return m;
}
template <>
Failure get_payload(Reader& r) {
  Failure m;
  m.code = static_cast<ErrorCode>(r.u16());
  m.message = r.str();
  return m;
}
template <typename T>
T get_payload(Reader&) {
  return T{};
}

template <std::size_t I>
Message decode_alternative(std::size_t index, Reader& r) {
  if constexpr (I < std::variant_size_v<Message>) {
    if (index == I) return Message(std::in_place_index<I>, get_payload<std::variant_alternative_t<I, Message>>(r));
    return decode_alternative<I + 1>(index, r);
  } else {
    throw Error(ErrorCode::ProtocolError, "unknown message tag " + std::to_string(index + 1));
  }
}

}  // namespace

std::uint16_t message_tag(const Message& message) { return static_cast<std::uint16_t>(message.index() + 1); }

std::vector<std::uint8_t> encode_message(const Message& message) {
  Writer w;
  w.u16(message_tag(message));
  std::visit([&](const auto& m) { put_payload(w, m); }, message);
  return w.take();
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint16_t tag = r.u16();
  if (tag == 0) throw Error(ErrorCode::ProtocolError, "message tag 0");
  Message m = decode_alternative<0>(tag - 1u, r);
  r.finish();
  return m;
}

std::vector<std::uint8_t> frame_message(const Message& message) {
  std::vector<std::uint8_t> body = encode_message(message);
  std::vector<std::uint8_t> out;
  out.reserve(body.size() + 4);
  const auto n = static_cast<std::uint32_t>(body.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<std::uint8_t> encode_chunk(const DataChunk& chunk) {
  Writer w;
  put(w, chunk);
  return w.take();
}

DataChunk decode_chunk(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  DataChunk c = get_chunk(r);
  r.finish();
  return c;
}

}  // namespace unitask

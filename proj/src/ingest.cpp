#include "unitask/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "unitask/error.hpp"
#include "unitask/random.hpp"

namespace unitask {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) parse_error(line, "bad number '" + std::string(token) + "'");
  return value;
}

double map_label(double raw, std::size_t line) {
  if (raw == 1.0) return 1.0;
  if (raw == 0.0 || raw == -1.0) return -1.0;
  parse_error(line, "label must be one of -1, 0, 1");
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<Sample> parse_sparse_dataset(std::istream& in) {
  std::vector<Sample> samples;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream tokens(text);
    std::string token;
    if (!(tokens >> token) || token.front() == '#') continue;

    Sample s;
    s.id = samples.size();
    s.label = map_label(parse_number<double>(token, line), line);
    std::int64_t previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) parse_error(line, "expected idx:val, got '" + token + "'");
      const std::string_view view(token);
      const auto index = parse_number<std::int64_t>(view.substr(0, colon), line);
      const double value = parse_number<double>(view.substr(colon + 1), line);
      if (index < 1) parse_error(line, "feature indices are 1-based");
      if (index <= previous) parse_error(line, "feature indices must be strictly ascending");
      if (index > std::int64_t{1} << 32) parse_error(line, "feature index out of range");
      if (!std::isfinite(value)) parse_error(line, "non-finite feature value");
      previous = index;
      s.features.push_back({static_cast<FeatureIndex>(index - 1), value});
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "no samples in input");
  return samples;
}

std::vector<Sample> parse_sparse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return parse_sparse_dataset(in);
}

void write_sparse_dataset(std::ostream& out, const std::vector<Sample>& samples) {
  for (const auto& s : samples) {
    out << (s.label > 0 ? "+1" : "-1");
    for (const auto& f : s.features) out << ' ' << (std::uint64_t{f.index} + 1) << ':' << format_double(f.value);
    out << '\n';
  }
}

void write_sparse_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_sparse_dataset(out, samples);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void SyntheticSpec::validate() const {
  if (n == 0 || d == 0) throw Error(ErrorCode::ConfigError, "synthetic data needs n, d >= 1");
  if (!(margin > 0.0)) throw Error(ErrorCode::ConfigError, "synthetic margin must be positive");
  if (!(noise >= 0.0 && noise < 1.0)) throw Error(ErrorCode::ConfigError, "noise fraction must be in [0, 1)");
}

std::vector<Sample> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x53594e));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<double> direction(spec.d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (auto& u : direction) u = gauss(rng);
    norm = std::sqrt(std::inner_product(direction.begin(), direction.end(), direction.begin(), 0.0));
  }
  for (auto& u : direction) u /= norm;

  std::vector<Sample> samples(spec.n);
  std::vector<double> x(spec.d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double y = coin(rng) ? 1.0 : -1.0;
    for (auto& v : x) v = gauss(rng);
    // Replace the component along the direction with a signed offset >= margin.
    const double along = std::inner_product(x.begin(), x.end(), direction.begin(), 0.0);
    const double offset = y * (spec.margin + std::abs(gauss(rng)));
    for (std::size_t j = 0; j < spec.d; ++j) x[j] += (offset - along) * direction[j];

    Sample& s = samples[i];
    s.id = i;
    s.label = y;
    for (std::size_t j = 0; j < spec.d; ++j) {
      if (x[j] != 0.0) s.features.push_back({static_cast<FeatureIndex>(j), x[j]});
    }
  }

  const auto flips = static_cast<std::size_t>(std::floor(spec.noise * static_cast<double>(spec.n)));
  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < flips; ++k) samples[order[k]].label = -samples[order[k]].label;
  return samples;
}

}  // namespace unitask

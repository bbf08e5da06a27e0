#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "panelforge/bench.hpp"

namespace panelforge::bench {

namespace {

constexpr std::array<std::pair<BenchKind, std::string_view>, 3> kind_names{{
    {BenchKind::lu, "LU"},
    {BenchKind::qr, "QR"},
    {BenchKind::gemm, "GEMM"},
}};

constexpr std::array<std::pair<BenchStrategy, std::string_view>, 6> strategy_names{{
    {BenchStrategy::mtb, "MTB"},
    {BenchStrategy::rtm, "RTM"},
    {BenchStrategy::la, "LA"},
    {BenchStrategy::la_mb, "LA_MB"},
    {BenchStrategy::mtb_gemm, "MTB-GEMM"},
    {BenchStrategy::rtm_gemm, "RTM-GEMM"},
}};

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto norm = [](char c) {
      if (c == '_') return '-';
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    };
    if (norm(a[i]) != norm(b[i])) return false;
  }
  return true;
}

void put_double(std::ostream& os, double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  os.write(buf.data(), res.ptr - buf.data());
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw std::runtime_error("csv line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    malformed(line, "bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(BenchKind kind) {
  for (const auto& [k, name] : kind_names) {
    if (k == kind) return name;
  }
  return "?";
}

std::string_view to_string(BenchStrategy strategy) {
  for (const auto& [s, name] : strategy_names) {
    if (s == strategy) return name;
  }
  return "?";
}

std::optional<BenchKind> parse_bench_kind(std::string_view text) {
  for (const auto& [k, name] : kind_names) {
    if (iequal(text, name)) return k;
  }
  return std::nullopt;
}

std::optional<BenchStrategy> parse_bench_strategy(std::string_view text) {
  for (const auto& [s, name] : strategy_names) {
    if (iequal(text, name)) return s;
  }
  return std::nullopt;
}

void emit_csv(const std::vector<BenchRecord>& records, std::ostream& sink) {
  sink << csv_header << '\n';
  for (const BenchRecord& r : records) {
    sink << to_string(r.kind) << ',' << to_string(r.strategy) << ',' << r.n << ',' << r.b << ',' << r.threads << ',';
    put_double(sink, r.seconds);
    sink << ',';
    put_double(sink, r.gflops);
    sink << ',';
    if (r.residual) put_double(sink, *r.residual);
    sink << '\n';
  }
  if (!sink) throw std::runtime_error("csv: write to sink failed");
}

std::vector<BenchRecord> parse_csv(std::istream& source) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(source, line)) malformed(lineno, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header) malformed(lineno, "unexpected header");

  std::vector<BenchRecord> out;
  while (std::getline(source, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 8) malformed(lineno, "expected 8 fields");

    BenchRecord r;
    const auto kind = parse_bench_kind(fields[0]);
    if (!kind) malformed(lineno, "unknown kind");
    const auto strategy = parse_bench_strategy(fields[1]);
    if (!strategy) malformed(lineno, "unknown strategy");
    r.kind = *kind;
    r.strategy = *strategy;
    r.n = parse_number<std::size_t>(fields[2], lineno);
    r.b = parse_number<std::size_t>(fields[3], lineno);
    r.threads = parse_number<std::size_t>(fields[4], lineno);
    r.seconds = parse_number<double>(fields[5], lineno);
    r.gflops = parse_number<double>(fields[6], lineno);
    if (!fields[7].empty()) r.residual = parse_number<double>(fields[7], lineno);
    out.push_back(r);
  }
  return out;
}

}  // namespace panelforge::bench

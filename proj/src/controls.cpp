#include "trapscope/controls.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trapscope/error.hpp"

namespace trapscope {

PiecewiseControl::PiecewiseControl(double horizon, std::vector<double> values)
    : horizon_(horizon), values_(std::move(values)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw Error(ErrorKind::DomainError, "control horizon must be positive and finite");
  }
  if (values_.empty()) {
    throw Error(ErrorKind::DomainError, "control needs at least one segment");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) throw Error(ErrorKind::DomainError, "control value is not finite");
  }
}

PiecewiseControl PiecewiseControl::zero(double horizon, int segments) {
  return constant(horizon, segments, 0.0);
}

PiecewiseControl PiecewiseControl::constant(double horizon, int segments, double value) {
  if (segments < 1) throw Error(ErrorKind::DomainError, "control needs at least one segment");
  return {horizon, std::vector<double>(segments, value)};
}

PiecewiseControl PiecewiseControl::sampled(double horizon, int segments,
                                           const std::function<double(double)>& fn) {
  if (segments < 1) throw Error(ErrorKind::DomainError, "control needs at least one segment");
  std::vector<double> values(segments);
  const double h = horizon / segments;
  for (int j = 0; j < segments; ++j) values[j] = fn((j + 0.5) * h);
  return {horizon, std::move(values)};
}

PiecewiseControl PiecewiseControl::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& x : out) x *= factor;
  return {horizon_, std::move(out)};
}

PiecewiseControl PiecewiseControl::shifted(double offset) const {
  std::vector<double> out(values_);
  for (double& x : out) x += offset;
  return {horizon_, std::move(out)};
}

PiecewiseControl PiecewiseControl::with_value(int segment, double value) const {
  std::vector<double> out(values_);
  out.at(segment) = value;
  return {horizon_, std::move(out)};
}

void require_same_grid(const PiecewiseControl& f, const PiecewiseControl& g) {
  const double scale = std::max(f.horizon(), g.horizon());
  if (f.segments() != g.segments() || std::abs(f.horizon() - g.horizon()) > 1e-12 * scale) {
    throw Error(ErrorKind::GridMismatch, "controls live on different grids (T=" + format_real(f.horizon()) +
                                             ", M=" + std::to_string(f.segments()) + " vs T=" +
                                             format_real(g.horizon()) + ", M=" + std::to_string(g.segments()) +
                                             ")");
  }
}

double integral(const PiecewiseControl& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  return f.step() * sum;
}

double inner(const PiecewiseControl& f, const PiecewiseControl& g) {
  require_same_grid(f, g);
  double sum = 0.0;
  const auto fv = f.values();
  const auto gv = g.values();
  for (std::size_t j = 0; j < fv.size(); ++j) sum += fv[j] * gv[j];
  return f.step() * sum;
}

double norm(const PiecewiseControl& f) { return std::sqrt(inner(f, f)); }

PiecewiseControl project_mean_zero(const PiecewiseControl& f) {
  // Two passes: the second removes the rounding residue of the first.
  auto out = f.shifted(-integral(f) / f.horizon());
  return out.shifted(-integral(out) / out.horizon());
}

UniformStream::UniformStream(std::uint64_t seed) : engine_(seed) {}

double UniformStream::next() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

PiecewiseControl random_direction(std::uint64_t seed, int segments, double horizon, bool mean_zero,
                                  double amplitude) {
  if (!(amplitude > 0.0)) throw Error(ErrorKind::DomainError, "amplitude must be positive");
  if (segments < 1) throw Error(ErrorKind::DomainError, "control needs at least one segment");
  UniformStream stream(seed);
  std::vector<double> values(segments);
  for (double& x : values) x = stream.next(-amplitude, amplitude);
  PiecewiseControl f(horizon, std::move(values));
  if (!mean_zero) return f;
  auto projected = project_mean_zero(f);
  const double n = norm(projected);
  if (n == 0.0) return projected;
  return project_mean_zero(projected.scaled(amplitude * std::sqrt(horizon) / n));
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string write_control(const PiecewiseControl& f) {
  std::string out = "T " + format_real(f.horizon()) + "\nM " + std::to_string(f.segments()) + "\n";
  for (double x : f.values()) {
    out += format_real(x);
    out += '\n';
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& message) {
  throw Error(ErrorKind::ParseError, "control line " + std::to_string(line) + ": " + message);
}

double parse_real_token(const std::string& token, int line) {
  if (token.empty()) parse_fail(line, "missing number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(x)) {
    parse_fail(line, "not a finite real: '" + token + "'");
  }
  return x;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

PiecewiseControl parse_control(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(current);
        current.clear();
      } else if (c != '\r') {
        current += c;
      }
    }
    if (!current.empty()) lines.push_back(current);
  }
  if (lines.size() < 2) parse_fail(static_cast<int>(lines.size()) + 1, "expected 'T <real>' and 'M <integer>'");

  auto header = split_ws(lines[0]);
  if (header.size() != 2 || header[0] != "T") parse_fail(1, "expected 'T <real>'");
  const double horizon = parse_real_token(header[1], 1);

  header = split_ws(lines[1]);
  if (header.size() != 2 || header[0] != "M") parse_fail(2, "expected 'M <integer>'");
  const std::string& mtok = header[1];
  if (mtok.find_first_not_of("0123456789") != std::string::npos || mtok.size() > 9) {
    parse_fail(2, "M must be a positive integer");
  }
  const int segments = std::stoi(mtok);
  if (segments < 1) parse_fail(2, "M must be a positive integer");

  if (lines.size() != static_cast<std::size_t>(segments) + 2) {
    parse_fail(static_cast<int>(lines.size()),
               "expected " + std::to_string(segments) + " value lines, found " + std::to_string(lines.size() - 2));
  }
  std::vector<double> values(segments);
  for (int j = 0; j < segments; ++j) {
    const auto tokens = split_ws(lines[j + 2]);
    if (tokens.size() != 1) parse_fail(j + 3, "expected exactly one real");
    values[j] = parse_real_token(tokens[0], j + 3);
  }
  if (!(horizon > 0.0)) parse_fail(1, "T must be positive");
  return {horizon, std::move(values)};
}

PiecewiseControl read_control_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open control file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_control(buf.str());
}

void write_control_file(const std::filesystem::path& path, const PiecewiseControl& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write control file " + path.string());
  out << write_control(f);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace trapscope

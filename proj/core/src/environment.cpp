#include "desapo/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace desapo {

namespace {

constexpr std::uint64_t kLossStream = 0x4c4f5353ULL;   // "LOSS"
constexpr std::uint64_t kDelayStream = 0x44454c41ULL;  // "DELA"

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_round(Round t) {
  if (t < 1) throw ConfigError("round index must be >= 1, got " + std::to_string(t));
}

void check_means(const std::vector<double>& means, const char* field) {
  if (means.empty()) throw ConfigError(std::string(field) + " must not be empty");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError(std::string(field) + " entries must lie in [0, 1]");
  }
}

double bernoulli(double mean, Round t, ArmIndex arm, std::uint64_t seed) {
  return keyed_uniform(seed, kLossStream, static_cast<std::uint64_t>(t), arm) < mean ? 1.0 : 0.0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

template <class T>
T parse_cell(const std::string& cell, std::size_t line_no) {
  T value{};
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("line " + std::to_string(line_no) + ": cannot parse \"" + cell + "\"");
  }
  return value;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(seed ^ mix64(stream));
  h = mix64(h ^ a);
  h = mix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double LossModel::loss_at(Round t, ArmIndex arm, std::uint64_t seed) const {
  check_round(t);
  return std::visit(
      Overloaded{
          [&](const BernoulliLosses& m) { return bernoulli(m.means.at(arm), t, arm, seed); },
          [&](const TableLosses& m) {
            if (static_cast<std::size_t>(t) > m.rows.size()) {
              throw ConfigError("round " + std::to_string(t) + " beyond loss table");
            }
            return m.rows[static_cast<std::size_t>(t) - 1].at(arm);
          },
          [&](const FlipLosses& m) {
            const auto& means = t < m.flip_round ? m.means_a : m.means_b;
            return bernoulli(means.at(arm), t, arm, seed);
          },
      },
      spec_);
}

double LossModel::mean_at(Round t, ArmIndex arm) const {
  check_round(t);
  return std::visit(Overloaded{
                        [&](const BernoulliLosses& m) { return m.means.at(arm); },
                        [&](const TableLosses& m) {
                          if (static_cast<std::size_t>(t) > m.rows.size()) {
                            throw ConfigError("round beyond loss table");
                          }
                          return m.rows[static_cast<std::size_t>(t) - 1].at(arm);
                        },
                        [&](const FlipLosses& m) {
                          return (t < m.flip_round ? m.means_a : m.means_b).at(arm);
                        },
                    },
                    spec_);
}

std::size_t LossModel::num_arms() const {
  return std::visit(Overloaded{
                        [](const BernoulliLosses& m) { return m.means.size(); },
                        [](const TableLosses& m) { return m.rows.empty() ? 0 : m.rows[0].size(); },
                        [](const FlipLosses& m) { return m.means_a.size(); },
                    },
                    spec_);
}

std::string LossModel::kind() const {
  return std::visit(Overloaded{
                        [](const BernoulliLosses&) { return std::string("bernoulli"); },
                        [](const TableLosses&) { return std::string("table"); },
                        [](const FlipLosses&) { return std::string("flip"); },
                    },
                    spec_);
}

void LossModel::validate(std::size_t num_arms, Round horizon) const {
  std::visit(Overloaded{
                 [&](const BernoulliLosses& m) { check_means(m.means, "env.loss.means"); },
                 [&](const TableLosses& m) {
                   if (m.rows.size() < static_cast<std::size_t>(horizon)) {
                     throw ConfigError("env.loss table has fewer rows than T");
                   }
                   for (const auto& row : m.rows) {
                     if (row.size() != num_arms) throw ConfigError("env.loss table row width differs from K");
                     for (double v : row) {
                       if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("env.loss table entries must lie in [0, 1]");
                     }
                   }
                 },
                 [&](const FlipLosses& m) {
                   check_means(m.means_a, "env.loss.means_a");
                   check_means(m.means_b, "env.loss.means_b");
                   if (m.means_a.size() != m.means_b.size()) {
                     throw ConfigError("env.loss.means_a and means_b differ in length");
                   }
                   if (m.flip_round < 1) throw ConfigError("env.loss.flip_round must be >= 1");
                 },
             },
             spec_);
  if (this->num_arms() != num_arms) {
    throw ConfigError("env.loss describes " + std::to_string(this->num_arms()) +
                      " arms but K = " + std::to_string(num_arms));
  }
}

Round DelayModel::delay_at(Round t, std::uint64_t seed) const {
  check_round(t);
  return std::visit(
      Overloaded{
          [](const FixedDelay& m) { return m.d; },
          [&](const TableDelay& m) {
            if (static_cast<std::size_t>(t) > m.delays.size()) {
              throw ConfigError("round " + std::to_string(t) + " beyond delay table");
            }
            return m.delays[static_cast<std::size_t>(t) - 1];
          },
          [&](const GeometricCappedDelay& m) {
            if (m.mean <= 0.0) return Round{0};
            const double u = 1.0 - keyed_uniform(seed, kDelayStream, static_cast<std::uint64_t>(t), 0);
            const double q = m.mean / (m.mean + 1.0);  // failure probability
            const double d = std::floor(std::log(u) / std::log(q));
            return static_cast<Round>(std::min(d, static_cast<double>(m.cap)));
          },
          [&](const SpikeDelay& m) {
            return std::find(m.rounds.begin(), m.rounds.end(), t) != m.rounds.end() ? m.spike : m.base;
          },
      },
      spec_);
}

std::string DelayModel::kind() const {
  return std::visit(Overloaded{
                        [](const FixedDelay&) { return std::string("fixed"); },
                        [](const TableDelay&) { return std::string("table"); },
                        [](const GeometricCappedDelay&) { return std::string("geometric"); },
                        [](const SpikeDelay&) { return std::string("spike"); },
                    },
                    spec_);
}

void DelayModel::validate(Round horizon) const {
  std::visit(Overloaded{
                 [](const FixedDelay& m) {
                   if (m.d < 0) throw ConfigError("env.delay.d must be >= 0");
                 },
                 [&](const TableDelay& m) {
                   if (m.delays.size() < static_cast<std::size_t>(horizon)) {
                     throw ConfigError("env.delay table has fewer rows than T");
                   }
                   for (Round d : m.delays) {
                     if (d < 0) throw ConfigError("env.delay table entries must be >= 0");
                   }
                 },
                 [](const GeometricCappedDelay& m) {
                   if (!(m.mean >= 0.0)) throw ConfigError("env.delay.mean must be >= 0");
                   if (m.cap < 0) throw ConfigError("env.delay.cap must be >= 0");
                 },
                 [](const SpikeDelay& m) {
                   if (m.base < 0 || m.spike < 0) throw ConfigError("env.delay base/spike must be >= 0");
                 },
             },
             spec_);
}

std::vector<Round> DelayModel::realize(Round horizon, std::uint64_t seed) const {
  std::vector<Round> out(static_cast<std::size_t>(std::max<Round>(horizon, 0)));
  for (Round t = 1; t <= horizon; ++t) out[static_cast<std::size_t>(t) - 1] = delay_at(t, seed);
  return out;
}

TableLosses read_loss_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("loss CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") throw ConfigError("loss CSV header must be t,arm0,...");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "arm" + std::to_string(k - 1)) {
      throw ConfigError("loss CSV header column " + std::to_string(k) + " must be arm" +
                        std::to_string(k - 1));
    }
  }
  TableLosses table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    const auto t = parse_cell<Round>(cells[0], line_no);
    if (t != static_cast<Round>(table.rows.size()) + 1) {
      throw ConfigError("line " + std::to_string(line_no) + ": rounds must be 1, 2, ... in order");
    }
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const double v = parse_cell<double>(cells[k], line_no);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("line " + std::to_string(line_no) + ": loss outside [0, 1]");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

TableLosses load_loss_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_loss_table_csv(in);
}

std::vector<Round> read_delay_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("delay CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "t" || header[1] != "delay") {
    throw ConfigError("delay CSV header must be t,delay");
  }
  std::vector<Round> delays;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw ConfigError("line " + std::to_string(line_no) + ": expected 2 columns");
    const auto t = parse_cell<Round>(cells[0], line_no);
    if (t != static_cast<Round>(delays.size()) + 1) {
      throw ConfigError("line " + std::to_string(line_no) + ": rounds must be 1, 2, ... in order");
    }
    const auto d = parse_cell<Round>(cells[1], line_no);
    if (d < 0) throw ConfigError("line " + std::to_string(line_no) + ": negative delay");
    delays.push_back(d);
  }
  return delays;
}

std::vector<Round> load_delay_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_delay_csv(in);
}

}  // namespace desapo

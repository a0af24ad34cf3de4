#include "crbeam/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace crbeam {

namespace {

struct RawScenario {
  std::map<std::string, std::pair<int, std::vector<double>>> lists;  // key -> (line, values)
  std::map<int, std::pair<int, std::vector<double>>> su_channel;     // k -> (line, re/im pairs)
  std::map<int, std::pair<int, std::vector<double>>> pu_channel;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("scenario parse error at line " + std::to_string(line) + ": " + msg);
}

std::vector<double> broadcast(const std::vector<double>& v, size_t n, int line,
                              const std::string& key) {
  if (v.size() == n) return v;
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  fail(line, key + " needs 1 or " + std::to_string(n) + " values, got " + std::to_string(v.size()));
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
  RawScenario raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip trailing comments.
    if (const auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "su_channel" || key == "pu_channel") {
      int idx = -1;
      if (!(ls >> idx) || idx < 0) fail(lineno, key + " needs a nonnegative user index");
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      if (vals.empty() || vals.size() % 2 != 0)
        fail(lineno, key + " needs re/im pairs");
      auto& slot = key == "su_channel" ? raw.su_channel : raw.pu_channel;
      if (!slot.emplace(idx, std::make_pair(lineno, std::move(vals))).second)
        fail(lineno, "duplicate " + key + " " + std::to_string(idx));
    } else {
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      if (!ls.eof()) fail(lineno, "non-numeric value for " + key);
      if (vals.empty()) fail(lineno, key + " needs at least one value");
      if (!raw.lists.emplace(key, std::make_pair(lineno, std::move(vals))).second)
        fail(lineno, "duplicate key " + key);
    }
  }

  auto take = [&raw](const std::string& key) -> const std::pair<int, std::vector<double>>* {
    const auto it = raw.lists.find(key);
    return it == raw.lists.end() ? nullptr : &it->second;
  };

  ScenarioConfig s;
  const auto* na = take("n_antennas");
  if (!na) fail(0, "missing n_antennas");
  if (na->second.size() != 1 || na->second[0] < 1 || na->second[0] != std::floor(na->second[0]))
    fail(na->first, "n_antennas must be a positive integer");
  s.n_antennas = static_cast<int>(na->second[0]);

  const auto* np = take("noise_power");
  if (!np) fail(0, "missing noise_power");
  if (np->second.size() != 1) fail(np->first, "noise_power takes one value");
  s.noise_power = np->second[0];

  // ---- channels ----
  const auto* su_angles = take("su_angles_deg");
  if (su_angles && !raw.su_channel.empty())
    fail(su_angles->first, "give su_angles_deg or su_channel lines, not both");
  if (su_angles) {
    for (double a : su_angles->second) {
      if (a < 0.0 || a > 180.0) fail(su_angles->first, "angles must lie in [0, 180] degrees");
      s.su_angles_deg.push_back(a);
      s.su_channels.push_back(ula_steering(a, s.n_antennas));
    }
  } else if (!raw.su_channel.empty()) {
    const int k_count = static_cast<int>(raw.su_channel.size());
    for (int k = 0; k < k_count; ++k) {
      const auto it = raw.su_channel.find(k);
      if (it == raw.su_channel.end()) fail(0, "su_channel indices must cover 0..K-1");
      const auto& [ln, vals] = it->second;
      if (static_cast<int>(vals.size()) != 2 * s.n_antennas)
        fail(ln, "su_channel " + std::to_string(k) + " needs " + std::to_string(s.n_antennas) +
                     " re/im pairs");
      ComplexVec h(s.n_antennas);
      for (int i = 0; i < s.n_antennas; ++i)
        h(i) = Complex(vals[static_cast<size_t>(2 * i)], vals[static_cast<size_t>(2 * i + 1)]);
      s.su_channels.push_back(std::move(h));
    }
  } else {
    fail(0, "missing SU channels (su_angles_deg or su_channel lines)");
  }
  const size_t k_count = s.su_channels.size();

  const auto* pu_angles = take("pu_angles_deg");
  if (pu_angles && !raw.pu_channel.empty())
    fail(pu_angles->first, "give pu_angles_deg or pu_channel lines, not both");
  if (pu_angles) {
    for (double a : pu_angles->second) {
      if (a < 0.0 || a > 180.0) fail(pu_angles->first, "angles must lie in [0, 180] degrees");
      s.pu_angles_deg.push_back(a);
      s.pu_channels.push_back(ula_steering(a, s.n_antennas));
    }
  } else {
    const int l_count = static_cast<int>(raw.pu_channel.size());
    for (int l = 0; l < l_count; ++l) {
      const auto it = raw.pu_channel.find(l);
      if (it == raw.pu_channel.end()) fail(0, "pu_channel indices must cover 0..L-1");
      const auto& [ln, vals] = it->second;
      if (static_cast<int>(vals.size()) != 2 * s.n_antennas)
        fail(ln, "pu_channel " + std::to_string(l) + " needs " + std::to_string(s.n_antennas) +
                     " re/im pairs");
      ComplexVec g(s.n_antennas);
      for (int i = 0; i < s.n_antennas; ++i)
        g(i) = Complex(vals[static_cast<size_t>(2 * i)], vals[static_cast<size_t>(2 * i + 1)]);
      s.pu_channels.push_back(std::move(g));
    }
  }
  const size_t l_count = s.pu_channels.size();

  // ---- thresholds, explicit units only ----
  const auto* sinr_db = take("sinr_db");
  const auto* sinr_lin = take("sinr_linear");
  if (sinr_db && sinr_lin) fail(sinr_db->first, "give sinr_db or sinr_linear, not both");
  if (!sinr_db && !sinr_lin) fail(0, "missing sinr_db or sinr_linear");
  {
    const auto& [ln, vals] = sinr_db ? *sinr_db : *sinr_lin;
    const auto expanded = broadcast(vals, k_count, ln, sinr_db ? "sinr_db" : "sinr_linear");
    for (double v : expanded) s.sinr_thresholds.push_back(sinr_db ? db_to_linear(v) : v);
  }

  const auto* ip_db = take("ip_db");
  const auto* ip_lin = take("ip_linear");
  if (ip_db && ip_lin) fail(ip_db->first, "give ip_db or ip_linear, not both");
  if (l_count > 0) {
    if (!ip_db && !ip_lin) fail(0, "missing ip_db or ip_linear");
    const auto& [ln, vals] = ip_db ? *ip_db : *ip_lin;
    const auto expanded = broadcast(vals, l_count, ln, ip_db ? "ip_db" : "ip_linear");
    for (double v : expanded) s.ip_thresholds.push_back(ip_db ? db_to_linear(v) : v);
  } else if (ip_db || ip_lin) {
    fail((ip_db ? ip_db : ip_lin)->first, "IP thresholds given but no PU channels");
  }

  // ---- radii, exactly one flavor per side ----
  auto radii = [&](const char* vec_key, const char* mat_key, size_t count,
                   const std::vector<ComplexVec>& nominals, std::vector<UncertaintyBall>& out_balls) {
    const auto* vec = take(vec_key);
    const auto* mat = take(mat_key);
    if (vec && mat) fail(vec->first, std::string("give ") + vec_key + " or " + mat_key + ", not both");
    if (count == 0) {
      if (vec || mat) fail((vec ? vec : mat)->first, "radii given but no matching channels");
      return;
    }
    if (!vec && !mat) fail(0, std::string("missing ") + vec_key + " or " + mat_key);
    const auto& [ln, vals] = vec ? *vec : *mat;
    const auto expanded = broadcast(vals, count, ln, vec ? vec_key : mat_key);
    for (size_t i = 0; i < count; ++i) {
      if (expanded[i] < 0.0) fail(ln, "radii must be nonnegative");
      out_balls.push_back(vec ? UncertaintyBall::from_vector_radius(expanded[i], nominals[i])
                              : UncertaintyBall::from_matrix_radius(expanded[i], nominals[i]));
    }
  };
  radii("su_vector_radius", "su_matrix_radius", k_count, s.su_channels, s.su_uncertainty);
  radii("pu_vector_radius", "pu_matrix_radius", l_count, s.pu_channels, s.pu_uncertainty);

  // Reject unknown keys so typos do not silently drop constraints.
  for (const auto& [key, entry] : raw.lists) {
    static const char* known[] = {"n_antennas",       "noise_power",      "su_angles_deg",
                                  "pu_angles_deg",    "sinr_db",          "sinr_linear",
                                  "ip_db",            "ip_linear",        "su_vector_radius",
                                  "su_matrix_radius", "pu_vector_radius", "pu_matrix_radius"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(entry.first, "unknown key '" + key + "'");
  }

  s.validate();
  return s;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  return parse_scenario(in);
}

std::string scenario_canonical_text(const ScenarioConfig& s) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "n " << s.n_antennas << "\n";
  out << "noise " << fmt(s.noise_power) << "\n";
  for (int k = 0; k < s.num_su(); ++k) {
    out << "su " << k;
    const auto& h = s.su_channels[static_cast<size_t>(k)];
    for (int i = 0; i < h.size(); ++i) out << " " << fmt(h(i).real()) << " " << fmt(h(i).imag());
    out << " gamma " << fmt(s.sinr_thresholds[static_cast<size_t>(k)]);
    out << " delta " << fmt(s.su_uncertainty[static_cast<size_t>(k)].vector_radius);
    out << " eps " << fmt(s.su_uncertainty[static_cast<size_t>(k)].matrix_radius);
    out << "\n";
  }
  for (int l = 0; l < s.num_pu(); ++l) {
    out << "pu " << l;
    const auto& g = s.pu_channels[static_cast<size_t>(l)];
    for (int i = 0; i < g.size(); ++i) out << " " << fmt(g(i).real()) << " " << fmt(g(i).imag());
    out << " kappa " << fmt(s.ip_thresholds[static_cast<size_t>(l)]);
    out << " eta " << fmt(s.pu_uncertainty[static_cast<size_t>(l)].vector_radius);
    out << " xi " << fmt(s.pu_uncertainty[static_cast<size_t>(l)].matrix_radius);
    out << "\n";
  }
  return out.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_hash_hex(const ScenarioConfig& s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(scenario_canonical_text(s))));
  return buf;
}

}  // namespace crbeam

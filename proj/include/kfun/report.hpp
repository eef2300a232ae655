#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "harness.hpp"

namespace kfun {

// every number leaves the program with 12 significant digits
inline std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char b[32];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

inline void round12(nlohmann::json& j) {
  if (j.is_number_float()) {
    double v = j.get<double>();
    j = std::isfinite(v) ? nlohmann::json(std::stod(fmt12(v))) : nlohmann::json(fmt12(v));
  } else if (j.is_structured()) {
    for (auto& e : j) round12(e);
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
  return o + "\"";
}

inline void write_summary(std::ostream& os, const std::vector<ExperimentResult>& results) {
  os << "id,theorem,target,limit,rel_err,rate,verdict\n";
  for (const auto& r : results)
    for (const auto& row : r.rows)
      os << csv_field(row.id) << ',' << csv_field(row.theorem) << ',' << fmt12(row.target) << ',' << fmt12(row.limit)
         << ',' << fmt12(row.rel_err) << ',' << fmt12(row.rate) << ',' << (row.pass ? "PASS" : "FAIL") << '\n';
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j = {{"n", c.n}, {"family", c.family.empty() ? "all" : c.family}, {"eps", c.eps},
                      {"brute_bmo", c.brute_bmo}, {"symbol", c.symbol}, {"seed", c.seed}, {"scale", c.scale}};
  j["p"] = c.p ? nlohmann::json(*c.p) : nlohmann::json("default");
  j["alpha"] = c.alpha ? nlohmann::json(*c.alpha) : nlohmann::json("default");
  j["k"] = c.k ? nlohmann::json(*c.k) : nlohmann::json("default");
  j["resolution"] = c.resolution ? nlohmann::json(*c.resolution) : nlohmann::json("default");
  return j;
}

inline nlohmann::json to_json(const ExperimentResult& r, const RunConfig& cfg) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"id", row.id}, {"target", row.target}, {"limit", row.limit}, {"rel_err", row.rel_err},
                    {"rate", row.rate}, {"verdict", row.pass ? "PASS" : "FAIL"}, {"note", row.note}});
  nlohmann::json j = {{"id", r.id}, {"theorem", r.theorem}, {"inputs", config_json(cfg)}, {"rows", rows},
                      {"detail", r.detail}, {"verdict", r.pass() ? "PASS" : "FAIL"}};
  round12(j);
  return j;
}

// DIR/summary.csv and DIR/<id>.json
inline void write_reports(const std::filesystem::path& dir, const std::vector<ExperimentResult>& results,
                          const std::vector<RunConfig>& cfgs) {
  std::filesystem::create_directories(dir);
  std::ofstream s(dir / "summary.csv");
  if (!s) throw Error("cannot write " + (dir / "summary.csv").string());
  write_summary(s, results);
  for (size_t i = 0; i < results.size(); ++i) {
    std::ofstream o(dir / (results[i].id + ".json"));
    o << to_json(results[i], cfgs[i]).dump(1) << '\n';
  }
}

// ----- configuration -----

// "0.5,0.25,0.125" or "2^-1..2^-8"
inline std::vector<double> parse_eps_grid(const std::string& s) {
  std::vector<double> out;
  auto dots = s.find("..");
  if (dots != std::string::npos) {
    auto expo = [&](const std::string& t) {
      if (t.rfind("2^", 0) != 0) throw Error("eps grid: expected 2^-a..2^-b, got '" + s + "'");
      return std::stoi(t.substr(2));
    };
    int a = expo(s.substr(0, dots)), b = expo(s.substr(dots + 2));
    if (a < b) std::swap(a, b);
    for (int j = a; j >= b; --j) out.push_back(std::ldexp(1.0, j));
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw Error("eps grid: bad number '" + tok + "'");
      out.push_back(v);
    }
  }
  if (out.empty()) throw Error("eps grid: empty");
  for (size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0 && out[i] < 1)) throw Error("eps grid: values must lie in (0, 1)");
    if (i && !(out[i] < out[i - 1])) throw Error("eps grid: values must be strictly decreasing");
  }
  return out;
}

inline void apply_oracle(RunConfig& c, const std::string& s) {
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "brute-bmo") c.brute_bmo = true;
    else if (tok == "dyadic-bmo") c.brute_bmo = false;
    else if (tok == "symbol") c.symbol = true;
    else if (tok == "no-symbol") c.symbol = false;
    else throw Error("unknown oracle flag '" + tok + "'");
  }
}

// One key = value setting (config file or command line).
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "n") {
      c.n = std::stoi(value);
      if (c.n != 1 && c.n != 2) throw Error("n must be 1 or 2");
    } else if (key == "p") {
      c.p = std::stod(value);
      if (!(*c.p >= 1)) throw Error("p must be >= 1");
    } else if (key == "k") {
      c.k = std::stoi(value);
      if (*c.k < 1 || *c.k > 2) throw Error("k must be 1 or 2");
    } else if (key == "alpha") {
      c.alpha = std::stod(value);
      if (!(*c.alpha > 0)) throw Error("alpha must be positive");
    } else if (key == "family") {
      if (!value.empty() && value != "all") parse_family(value);
      c.family = value == "all" ? "" : value;
    } else if (key == "eps-grid" || key == "eps_grid") {
      c.eps = parse_eps_grid(value);
    } else if (key == "resolution") {
      c.resolution = std::stoi(value);
      if (*c.resolution < 16) throw Error("resolution must be at least 16");
    } else if (key == "oracle") {
      apply_oracle(c, value);
    } else if (key == "seed") {
      c.seed = std::stoul(value);
    } else {
      throw Error("unknown setting '" + key + "'");
    }
  } catch (const std::logic_error& e) {  // stoi / stod
    throw Error("bad value '" + value + "' for " + key);
  }
}

// Key-value file: top-level keys apply to every experiment, [section] keys to the experiment of that id.
struct ConfigFile {
  std::vector<std::pair<std::string, std::string>> global;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

  static ConfigFile read(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(std::string("config: ") + e.what());
    }
    ConfigFile c;
    for (const auto& [k, v] : pt) {
      if (v.empty()) {
        c.global.emplace_back(k, v.data());
      } else {
        find_experiment(k);
        for (const auto& [kk, vv] : v) c.sections[k].emplace_back(kk, vv.data());
      }
    }
    return c;
  }
};

}  // namespace kfun

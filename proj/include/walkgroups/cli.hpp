#pragma once

// Command-line surface. run() parses the arguments and writes to the given
// streams, so the commands can be driven in-process by tests.
//
// Exit codes: 0 success, 1 input error, 2 H1 fails, 3 inconclusive under
// --strict, 4 a family verification failed.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "walkgroups/classifiers.hpp"
#include "walkgroups/elliptic.hpp"
#include "walkgroups/geometry.hpp"
#include "walkgroups/group.hpp"
#include "walkgroups/model.hpp"
#include "walkgroups/parallel.hpp"
#include "walkgroups/walk_dp.hpp"

namespace walkgroups::cli {

using nlohmann::json;

enum ExitCode { ok = 0, input_error = 1, h1_failure = 2, inconclusive = 3, verification_failed = 4 };

struct Globals {
  bool json = false;
  int jobs = 1;
  std::uint64_t seed = 1;
  int bound = 64;
  double tol = 1e-9;
  bool strict = false;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Serialization: floats with 17 significant digits, rationals as "p/q".

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump_to(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_to(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump_to(v, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt(v) : "null";
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string dump(const json& j) {
  std::string s;
  dump_to(j, s);
  return s;
}

inline json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return a;
}

inline json rationals(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

inline std::string series_string(const std::vector<Rational>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s + "]";
}

// ---------------------------------------------------------------------------
// Inputs.

inline WeightedModel read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const std::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// A file yields itself; a directory yields its *.json files in name order.
inline std::vector<std::filesystem::path> model_paths(const std::string& arg, bool& batch) {
  namespace fs = std::filesystem;
  const fs::path p(arg);
  if (fs::is_directory(p)) {
    batch = true;
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw InputError("no .json model files in '" + arg + "'");
    return out;
  }
  if (!fs::exists(p)) throw InputError("no such file or directory '" + arg + "'");
  batch = false;
  return {p};
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// "0.05", "1/20" or "3" to an exact rational.
inline Rational parse_number(const std::string& s) {
  try {
    return s.find('/') != std::string::npos ? parse_rational(s) : parse_decimal(s);
  } catch (const std::exception& e) {
    throw InputError("bad number '" + s + "': " + e.what());
  }
}

inline std::vector<Rational> parse_numbers(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& part : split(s, ','))
    if (!part.empty()) out.push_back(parse_number(part));
  if (out.empty()) throw InputError("empty number list");
  return out;
}

inline LatticePoint parse_point(const std::string& s) {
  LatticePoint p;
  for (const auto& part : split(s, ',')) {
    try {
      size_t used = 0;
      p.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("bad lattice point '" + s + "'");
    }
  }
  return p;
}

/// Inline model "1,-1:2; -1,1:2; 1,0" (weight defaults to 1).
inline WeightedModel parse_inline_model(const std::string& s) {
  WeightMap w;
  int d = 0;
  for (const auto& entry : split(s, ';')) {
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    try {
      Step st = Step::parse(entry.substr(0, colon));
      const Rational v = colon == std::string::npos ? Rational(1) : parse_number(entry.substr(colon + 1));
      if (d == 0) d = st.dim();
      if (w.count(st)) throw InputError("duplicate step " + st.str());
      w.emplace(std::move(st), v);
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError("bad step entry '" + entry + "': " + e.what());
    }
  }
  if (w.empty()) throw InputError("empty inline model");
  try {
    return WeightedModel(d, w);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

// ---------------------------------------------------------------------------
// analyze

struct Analysis {
  json report;
  int code = ok;
};

inline json h1_json(const H1Result& h) {
  json j{{"satisfied", h.satisfied}};
  if (!h.satisfied) j["witness"] = rationals(h.witness);
  return j;
}

inline json group_json(const GroupVerdict& v) {
  json j{{"verdict", v.str()}, {"bound", v.bound}, {"finite", v.finite()}};
  if (v.order) j["order"] = *v.order;
  return j;
}

inline json geometry_json(const WeightedModel& m) {
  const auto cp = critical_point(m);
  const auto cov = covariance(m, cp);
  const auto orders = dihedral_orders(cov);
  const auto rd = reflection_group(cov, orders);
  json pairs = json::array();
  for (const auto& [key, o] : orders) {
    json p{{"i", key.first + 1}, {"j", key.second + 1}, {"a", cov.a(key.first, key.second)}, {"theta", o.theta}};
    if (o.m) p["m"] = *o.m;
    if (o.rational) p["theta_rational"] = to_string(*o.rational);
    if (const auto r = o.rotation_order()) p["rotation_order"] = *r;
    pairs.push_back(p);
  }
  json j{{"x0", to_json(cp.x0)}, {"x0_residual", cp.residual}, {"delta", to_json(cov.delta)},
         {"pairs", pairs},        {"coxeter", rd.label}};
  if (rd.order) j["reflection_group_order"] = *rd.order;
  return j;
}

inline json elliptic_summary(const WeightedModel& m, const GroupVerdict& g, const Globals& gl) {
  const auto probe = rationality_probe(m, default_t_samples(), 16, gl.tol);
  json j{{"t", rationals(probe.t)}, {"r", probe.r}, {"spread", probe.spread}, {"rational", probe.rational}};
  if (probe.rational) {
    j["value"] = to_string(probe.value);
    j["q"] = probe.value.den;
    j["predicted_order"] = *probe.predicted_order();
  }
  j["consistent"] = probe.predicted_order() == g.order;
  return j;
}

inline json weyl_json(const WeylReport3D& r) {
  json j{{"h1", r.h1}, {"weyl", r.weyl}, {"a", r.a}, {"reasons", r.reasons},
         {"slices_consistent", r.slices_consistent}};
  if (r.triplet) j["triplet"] = *r.triplet;
  if (r.list_entry) j["list_entry"] = *r.list_entry;
  if (r.group_order) j["group_order"] = *r.group_order;
  json sl = json::array();
  for (const auto& s : r.slices) {
    json e{{"z", to_string(s.z)}};
    e["gx"] = s.gx ? json(*s.gx) : json(nullptr);
    e["gy"] = s.gy ? json(*s.gy) : json(nullptr);
    e["gz"] = s.gz ? json(*s.gz) : json(nullptr);
    sl.push_back(e);
  }
  j["slices"] = sl;
  return j;
}

inline Analysis analyze_model(const WeightedModel& m, const Globals& gl, bool timing = true) {
  const auto start = std::chrono::steady_clock::now();
  Analysis a;
  json& r = a.report;
  r["model"] = model_to_json(m);
  const auto h1 = check_h1(m);
  r["h1"] = h1_json(h1);
  if (!h1.satisfied) {
    a.code = h1_failure;
    return a;
  }
  const auto g = group_order(m, {gl.bound, 3, gl.seed, 4});
  r["group"] = group_json(g);
  if (!g.finite() && gl.strict) a.code = inconclusive;
  try {
    r["geometry"] = geometry_json(m);
  } catch (const std::exception& e) {
    r["geometry"] = {{"error", e.what()}};
  }
  if (m.dim() == 2) {
    try {
      r["elliptic"] = elliptic_summary(m, g, gl);
    } catch (const std::exception& e) {
      r["elliptic"] = {{"error", e.what()}};
    }
  } else if (m.dim() == 3) {
    try {
      Classify3DOptions opt;
      opt.seed = gl.seed;
      opt.tol = gl.tol;
      r["weyl"] = weyl_json(classify3d_check(m, opt));
    } catch (const std::exception& e) {
      r["weyl"] = {{"error", e.what()}};
    }
  }
  if (timing)
    r["timing_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return a;
}

inline void print_analysis(std::ostream& out, const json& r) {
  out << "model " << r["model"]["steps"].dump() << "\n";
  out << "H1 " << (r["h1"]["satisfied"].get<bool>() ? "satisfied" : "violated");
  if (r["h1"].contains("witness")) out << " witness " << r["h1"]["witness"].dump();
  out << "\n";
  if (!r.contains("group")) return;
  out << "group " << r["group"]["verdict"].get<std::string>() << "\n";
  const auto& geo = r["geometry"];
  if (geo.contains("error")) {
    out << "geometry error: " << geo["error"].get<std::string>() << "\n";
  } else {
    out << "x0";
    for (const auto& v : geo["x0"]) out << " " << fmt(v.get<double>());
    out << "\n";
    for (const auto& p : geo["pairs"]) {
      out << "a" << p["i"] << p["j"] << " = " << fmt(p["a"].get<double>()) << "  theta = " << fmt(p["theta"].get<double>());
      if (p.contains("m")) out << "  m" << p["i"] << p["j"] << " = " << p["m"];
      else if (p.contains("theta_rational")) out << "  (" << p["theta_rational"].get<std::string>() << ")";
      out << "\n";
    }
    out << "coxeter " << geo["coxeter"].get<std::string>();
    if (geo.contains("reflection_group_order")) out << " |H| = " << geo["reflection_group_order"];
    out << "\n";
  }
  if (r.contains("elliptic")) {
    const auto& e = r["elliptic"];
    if (e.contains("error")) {
      out << "elliptic error: " << e["error"].get<std::string>() << "\n";
    } else {
      out << "r(t)";
      for (const auto& v : e["r"]) out << " " << fmt(v.get<double>());
      out << "\n";
      if (e["rational"].get<bool>())
        out << "r = " << e["value"].get<std::string>() << " (q = " << e["q"] << ", predicted order "
            << e["predicted_order"] << ")\n";
      else
        out << "r non-constant or irrational\n";
      out << "elliptic/orbit " << (e["consistent"].get<bool>() ? "consistent" : "INCONSISTENT") << "\n";
    }
  }
  if (r.contains("weyl")) {
    const auto& w = r["weyl"];
    if (w.contains("error")) {
      out << "weyl error: " << w["error"].get<std::string>() << "\n";
    } else {
      out << "weyl " << (w["weyl"].get<bool>() ? "true" : "false");
      if (w.contains("triplet")) out << " triplet " << w["triplet"].dump();
      if (w.contains("list_entry")) out << " slices " << w["list_entry"].get<std::string>();
      out << "\n";
      for (const auto& why : w["reasons"]) out << "  " << why.get<std::string>() << "\n";
    }
  }
  if (r.contains("timing_ms")) out << "time " << fmt(r["timing_ms"].get<double>()) << " ms\n";
}

/// Runs fn over each model file (in parallel for directories); JSON lines in
/// batch mode. Returns the largest exit code.
template <class Fn, class Print>
int over_models(const std::string& arg, const Globals& gl, std::ostream& out, Fn fn, Print print) {
  bool batch = false;
  const auto paths = model_paths(arg, batch);
  struct Item {
    json report;
    int code = ok;
  };
  const auto items = parallel_map(paths.size(), batch ? gl.jobs : 1, [&](size_t i) {
    Item it;
    try {
      auto [rep, code] = fn(read_model_file(paths[i]));
      it.report = std::move(rep);
      it.code = code;
    } catch (const std::exception& e) {
      if (!batch) throw;
      it.report = {{"error", e.what()}};
      it.code = input_error;
    }
    if (batch) it.report["file"] = paths[i].filename().string();
    return it;
  });
  int code = ok;
  for (const auto& it : items) {
    if (batch || gl.json) out << dump(it.report) << "\n";
    else print(out, it.report);
    code = std::max(code, it.code);
  }
  return code;
}

// ---------------------------------------------------------------------------
// elliptic

template <class Real>
json elliptic_row(const WeightedModel& m, const Rational& t, double tol) {
  const auto curve = kernel_curve<Real>(m, t);
  const auto inv = periods(curve);
  const auto th = verify_theta_identities(inv, tol);
  auto d = [](const Real& x) { return special::to_double(x); };
  return {{"t", to_string(t)},        {"r", d(inv.r)},
          {"r_raw", d(inv.r_raw)},    {"k2", d(inv.k2)},
          {"kp2", d(inv.kp2)},        {"K", d(inv.K)},
          {"Kp", d(inv.Kp)},          {"omega1", d(inv.omega1)},
          {"omega2", d(inv.omega2)},  {"omega3", d(inv.omega3)},
          {"w", d(inv.w)},            {"nome", d(inv.nome)},
          {"theta_k2_residual", th.k2_residual}, {"theta_w2_residual", th.w2_residual},
          {"nome_convention", th.convention}};
}

struct EllipticArgs {
  std::string t = "1/20,1/10,1/5";
  bool r0 = false;
};

inline std::pair<json, int> elliptic_model(const WeightedModel& m, const EllipticArgs& ea, const Globals& gl) {
  if (m.dim() != 2) throw InputError("elliptic requires a 2D model");
  const auto h1 = check_h1(m);
  json r{{"model", model_to_json(m)}, {"h1", h1_json(h1)}};
  if (!h1.satisfied) return {r, h1_failure};
  const auto ts = parse_numbers(ea.t);
  const bool hp = std::getenv("WALKGROUPS_PRECISION") != nullptr;
  if (hp) use_high_precision(high_precision_digits());
  json rows = json::array();
  for (const auto& t : ts) {
    try {
      rows.push_back(hp ? elliptic_row<HighPrecision>(m, t, 1e-8) : elliptic_row<double>(m, t, 1e-8));
    } catch (const EllipticError& e) {
      throw InputError("t = " + to_string(t) + ": " + e.what());
    }
  }
  r["samples"] = rows;
  r["precision"] = hp ? "mpfr" : "double";
  if (hp) r["digits"] = high_precision_digits();
  int code = ok;
  const bool probe_ok =
      ts.size() >= 3 && std::all_of(ts.begin(), ts.end(), [](const Rational& t) { return t > 0 && t <= Rational(1, 4); });
  if (probe_ok) {
    const auto p = rationality_probe(m, ts, 16, gl.tol);
    json v{{"rational", p.rational}, {"spread", p.spread}};
    if (p.rational) {
      v["value"] = to_string(p.value);
      v["q"] = p.value.den;
      v["predicted_order"] = *p.predicted_order();
    } else if (gl.strict) {
      code = inconclusive;
    }
    r["rationality"] = v;
  }
  if (ea.r0) {
    const auto est = estimate_r0(m);
    r["r0"] = {{"estimate", est.estimate},
               {"nearest", to_string(est.nearest)},
               {"distance", est.distance},
               {"member", est.distance <= 1e-4},
               {"t", rationals(est.t)},
               {"high_precision", est.high_precision}};
  }
  if (verify_order10_models(m)) {
    json res = json::array();
    for (const auto& t : {Rational(1, 100), Rational(1, 1000), Rational(1, 10000)})
      res.push_back({{"t", to_string(t)}, {"residual", order10_residual_at(m, t)}});
    r["order10_residual"] = res;
  }
  return {r, code};
}

inline void print_elliptic(std::ostream& out, const json& r) {
  out << "model " << r["model"]["steps"].dump() << "\n";
  if (!r["h1"]["satisfied"].get<bool>()) {
    out << "H1 violated\n";
    return;
  }
  out << "precision " << r["precision"].get<std::string>() << "\n";
  out << "t  r  k^2  K  K'  theta residuals (k^2, w^2)\n";
  for (const auto& s : r["samples"])
    out << s["t"].get<std::string>() << "  " << fmt(s["r"]) << "  " << fmt(s["k2"]) << "  " << fmt(s["K"]) << "  "
        << fmt(s["Kp"]) << "  " << fmt(s["theta_k2_residual"]) << "  " << fmt(s["theta_w2_residual"]) << "\n";
  if (r.contains("rationality")) {
    const auto& v = r["rationality"];
    if (v["rational"].get<bool>())
      out << "constant r = " << v["value"].get<std::string>() << " (denominator " << v["q"] << ", group order "
          << v["predicted_order"] << ")\n";
    else
      out << "r not constant rational (spread " << fmt(v["spread"]) << ")\n";
  }
  if (r.contains("r0")) {
    const auto& e = r["r0"];
    out << "r0 ~ " << fmt(e["estimate"]) << " nearest " << e["nearest"].get<std::string>() << " distance "
        << fmt(e["distance"]) << (e["member"].get<bool>() ? " (in list)" : " (NOT in list)") << "\n";
  }
  if (r.contains("order10_residual")) {
    out << "order-10 residual";
    for (const auto& e : r["order10_residual"]) out << "  t=" << e["t"].get<std::string>() << ": " << fmt(e["residual"]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// classify2d

inline json census_json(const Classify2DReport& rep) {
  json filters = json::array();
  for (const auto& f : rep.filters) filters.push_back({{"filter", f.name}, {"remaining", f.remaining}});
  json orders = json::object();
  for (const auto& [o, n] : rep.orders) orders[std::to_string(o)] = n;
  json entries = json::array();
  for (const auto& e : rep.entries) {
    json j{{"model", e.model.str()}, {"h1", e.h1}, {"elliptic", e.elliptic}, {"consistent", e.consistent}};
    j["order"] = e.order ? json(*e.order) : json(nullptr);
    j["r"] = e.r ? json(to_string(*e.r)) : json(nullptr);
    entries.push_back(j);
  }
  return {{"mode", rep.mode == CensusMode::raw ? "raw" : "reduced"},
          {"total", rep.total},
          {"filters", filters},
          {"classes", rep.classes},
          {"singular", rep.singular},
          {"finite", rep.finite},
          {"orders", orders},
          {"entries", entries}};
}

inline void print_census(std::ostream& out, const Classify2DReport& rep) {
  out << "mode " << (rep.mode == CensusMode::raw ? "raw" : "reduced") << ", " << rep.total << " step sets\n";
  for (const auto& f : rep.filters) out << "  " << f.name << ": " << f.remaining << "\n";
  for (const auto& e : rep.entries) {
    out << e.model.str() << "  ";
    if (!e.h1) out << "singular";
    else if (e.order) out << "order " << *e.order;
    else out << "infinite";
    if (e.r) out << "  r = " << to_string(*e.r);
    if (!e.consistent) out << "  INCONSISTENT (" << e.elliptic << ")";
    out << "\n";
  }
  out << rep.classes << " classes, " << rep.finite << " finite\n";
  out << "singular " << rep.singular << "\n";
  for (const auto& [o, n] : rep.orders) out << "order " << o << ": " << n << "\n";
}

// ---------------------------------------------------------------------------
// verify-families

struct FamilyArgs {
  std::string family;
  std::string c, abc, k, weights, model;
};

inline FamilyParams family_params(const FamilyArgs& fa, const std::string& id) {
  FamilyParams p;
  if (!fa.c.empty() && id == "A3-family1") p.values = parse_numbers(fa.c);
  if (!fa.abc.empty() && id == "A3-family2") {
    for (const auto& triple : split(fa.abc, ';'))
      if (!triple.empty()) {
        const auto v = parse_numbers(triple);
        if (v.size() != 3) throw InputError("--abc expects a,b,c triples separated by ';'");
        p.values.insert(p.values.end(), v.begin(), v.end());
      }
  }
  if (!fa.k.empty() && id == "Z2xD2k") p.values = parse_numbers(fa.k);
  if (id == "4a" || id == "order8-third-model" || id == "order10-triple") {
    if (!fa.weights.empty()) p.models.push_back(parse_inline_model(fa.weights));
    if (!fa.model.empty()) p.models.push_back(read_model_file(fa.model));
  }
  return p;
}

inline json family_json(const FamilyResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j{{"label", c.label}, {"model", c.model.str()}, {"member", c.member}, {"pass", c.pass}};
    j["order"] = c.order ? json(*c.order) : json(nullptr);
    if (c.report) j["report"] = weyl_json(*c.report);
    checks.push_back(j);
  }
  return {{"family", r.id}, {"pass", r.pass()}, {"checks", checks}};
}

inline void print_family(std::ostream& out, const FamilyResult& r) {
  out << r.id << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : r.checks) {
    out << "  " << c.label << "  member " << (c.member ? "yes" : "no") << "  order "
        << (c.order ? std::to_string(*c.order) : std::string("?"));
    if (c.report && c.report->triplet) {
      const auto& t = *c.report->triplet;
      out << "  triplet (" << t[0] << "," << t[1] << "," << t[2] << ")  weyl " << (c.report->weyl ? "true" : "false");
      if (c.report->list_entry) out << "  slices " << *c.report->list_entry;
    }
    out << "  " << (c.pass ? "pass" : "FAIL") << "\n";
  }
}

// ---------------------------------------------------------------------------
// search3d

struct SearchArgs {
  int max_steps = 0;
  std::string support;
  std::string weights = "0,1";
  bool no_quotient = false;
  size_t limit = 1000000;
};

inline SearchConstraints search_constraints(const SearchArgs& sa) {
  SearchConstraints c;
  c.max_steps = sa.max_steps;
  c.symmetry_quotient = !sa.no_quotient;
  c.limit = sa.limit;
  if (!sa.support.empty()) {
    for (const auto& s : split(sa.support, ';'))
      if (!s.empty()) {
        try {
          c.support.push_back(Step::parse(s));
        } catch (const std::exception& e) {
          throw InputError("bad support step '" + s + "': " + e.what());
        }
        if (c.support.back().dim() != 3) throw InputError("support steps must be 3D");
      }
  }
  const auto opts = parse_numbers(sa.weights);
  for (const auto& s : c.support.empty() ? all_steps_3d() : c.support) c.weight_options[s] = opts;
  return c;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Globals gl;
  CLI::App app{"Group of the walk, reflection geometry and elliptic invariants of lattice walk models", "walkgroups"};
  app.require_subcommand(1);
  app.add_flag("--json", gl.json, "machine-readable output (one JSON document per line)");
  app.add_option("--jobs", gl.jobs, "worker threads for batch and census runs")->check(CLI::Range(1, 1024));
  app.add_option("--seed", gl.seed, "seed for orbit test points");
  app.add_option("--bound", gl.bound, "group order search bound")->check(CLI::Range(2, 100000));
  app.add_option("--tol", gl.tol, "numerical tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--strict", gl.strict, "exit 3 on inconclusive verdicts");

  std::string path;
  auto* analyze = app.add_subcommand("analyze", "full report for a model file, or each model of a directory");
  analyze->add_option("model", path, "model file or directory")->required();

  std::string mode = "reduced";
  auto* classify2d = app.add_subcommand("classify2d", "census of the unweighted small-step 2D models");
  classify2d->add_option("--mode", mode, "raw or reduced")->check(CLI::IsMember({"raw", "reduced"}));

  Classify3DOptions c3;
  auto* classify3d = app.add_subcommand("classify3d", "Weyl check of a 3D model file or directory");
  classify3d->add_option("model", path, "model file or directory")->required();
  classify3d->add_option("--group-bound", c3.group_bound, "also compute |G| up to this bound (0: skip)");

  EllipticArgs ea;
  auto* elliptic = app.add_subcommand("elliptic", "elliptic invariants and r(t) of a 2D model");
  elliptic->add_option("model", path, "model file or directory")->required();
  elliptic->add_option("--t", ea.t, "comma-separated t values (decimals or p/q)");
  elliptic->add_flag("--r0", ea.r0, "estimate r0 = lim r(t) as t -> 0");

  std::string from, to;
  int n = 0;
  auto* count = app.add_subcommand("count", "series of confined walk counts from P to Q");
  count->add_option("model", path, "model file")->required();
  count->add_option("--from", from, "start point, e.g. 0,0")->required();
  count->add_option("--to", to, "end point, e.g. 0,0")->required();
  count->add_option("--n", n, "maximal length")->required()->check(CLI::NonNegativeNumber);

  FamilyArgs fa;
  auto* verify = app.add_subcommand("verify-families", "instantiate and check the known finite-group families");
  verify->add_option("--family", fa.family, "family id or 'all'")->required();
  verify->add_option("--c", fa.c, "A3-family1 parameters c");
  verify->add_option("--abc", fa.abc, "A3-family2 parameters a,b,c;a,b,c");
  verify->add_option("--k", fa.k, "Z2xD2k parameters k");
  verify->add_option("--weights", fa.weights, "inline 2D model, e.g. '1,-1:2; -1,1:2; 1,0:4; -1,0:1'");
  verify->add_option("--model", fa.model, "2D model file to test against the family");

  SearchArgs sa;
  auto* search = app.add_subcommand("search3d", "search constrained 3D models with the Weyl property");
  search->add_option("--max-steps", sa.max_steps, "maximal number of steps (0: no limit)");
  search->add_option("--support", sa.support, "allowed steps, e.g. '1,0,0; -1,0,0; 0,1,1'");
  search->add_option("--weights", sa.weights, "allowed weights per step, 0 meaning absent");
  search->add_flag("--no-quotient", sa.no_quotient, "do not quotient by coordinate permutations");
  search->add_option("--limit", sa.limit, "refuse spaces larger than this");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return input_error;
  }

  try {
    if (*analyze) {
      return over_models(
          path, gl, out,
          [&](const WeightedModel& m) {
            auto a = analyze_model(m, gl);
            return std::pair{std::move(a.report), a.code};
          },
          print_analysis);
    }
    if (*classify2d) {
      const auto rep = enumerate_2d_unweighted(mode == "raw" ? CensusMode::raw : CensusMode::reduced, gl.jobs, gl.seed);
      if (gl.json) out << dump(census_json(rep)) << "\n";
      else print_census(out, rep);
      if (mode == "reduced" && rep.classes != 79) err << "warning: reduction pipeline produced " << rep.classes << " classes\n";
      return ok;
    }
    if (*classify3d) {
      c3.seed = gl.seed;
      c3.tol = gl.tol;
      return over_models(
          path, gl, out,
          [&](const WeightedModel& m) {
            if (m.dim() != 3) throw InputError("classify3d requires a 3D model");
            const auto rep = classify3d_check(m, c3);
            json j = weyl_json(rep);
            j["model"] = model_to_json(m);
            int code = !rep.h1 ? h1_failure : ok;
            if (code == ok && gl.strict && !rep.triplet) code = inconclusive;
            return std::pair{std::move(j), code};
          },
          [](std::ostream& o, const json& j) {
            o << "model " << j["model"]["steps"].dump() << "\n";
            if (!j["h1"].get<bool>()) {
              o << "H1 violated\n";
              return;
            }
            o << "a " << fmt(j["a"][0]) << " " << fmt(j["a"][1]) << " " << fmt(j["a"][2]) << "\n";
            if (j.contains("triplet")) o << "triplet " << j["triplet"].dump() << "\n";
            o << "weyl " << (j["weyl"].get<bool>() ? "true" : "false") << "\n";
            for (const auto& why : j["reasons"]) o << "  " << why.get<std::string>() << "\n";
            for (const auto& s : j["slices"])
              o << "slice z=" << s["z"].get<std::string>() << "  |G_x| " << s["gx"].dump() << "  |G_y| "
                << s["gy"].dump() << "  |G_z| " << s["gz"].dump() << "\n";
            if (j.contains("list_entry")) o << "list entry " << j["list_entry"].get<std::string>() << "\n";
            if (j.contains("group_order")) o << "|G| = " << j["group_order"] << "\n";
          });
    }
    if (*elliptic) {
      return over_models(
          path, gl, out, [&](const WeightedModel& m) { return elliptic_model(m, ea, gl); }, print_elliptic);
    }
    if (*count) {
      const auto m = read_model_file(path);
      const auto P = parse_point(from), Q = parse_point(to);
      std::vector<Rational> terms;
      try {
        terms = series_terms(m, P, Q, n);
      } catch (const WalkQueryError& e) {
        throw InputError(e.what());
      }
      if (gl.json) {
        out << dump({{"model", model_to_json(m)}, {"from", P}, {"to", Q}, {"n", n}, {"series", rationals(terms)}})
            << "\n";
      } else {
        out << dump(rationals(terms)) << "\n";
      }
      return ok;
    }
    if (*verify) {
      std::vector<std::string> ids;
      if (fa.family == "all") {
        for (const auto& s : family_specs()) ids.push_back(s.id);
      } else {
        try {
          family_spec(fa.family);
        } catch (const std::exception& e) {
          throw InputError(e.what());
        }
        ids.push_back(fa.family);
      }
      bool all = true;
      for (const auto& id : ids) {
        const auto res = verify_family(id, family_params(fa, id), gl.seed, gl.tol);
        all = all && res.pass();
        if (gl.json) out << dump(family_json(res)) << "\n";
        else print_family(out, res);
      }
      return all ? ok : verification_failed;
    }
    if (*search) {
      const auto res = search3d(search_constraints(sa), gl.jobs, gl.seed, gl.tol);
      if (gl.json) {
        json hits = json::array();
        for (const auto& h : res.hits) {
          json j = weyl_json(h);
          j["model"] = model_to_json(h.model);
          hits.push_back(j);
        }
        out << dump({{"space", res.space},
                     {"examined", res.examined},
                     {"h1_models", res.h1_models},
                     {"nonpositive", res.nonpositive},
                     {"hits", hits}})
            << "\n";
      } else {
        out << "space " << res.space << ", examined " << res.examined << ", H1 " << res.h1_models
            << ", a_ij <= 0 " << res.nonpositive << ", Weyl " << res.hits.size() << "\n";
        for (const auto& h : res.hits) {
          out << h.model.str();
          if (h.triplet) out << "  (" << (*h.triplet)[0] << "," << (*h.triplet)[1] << "," << (*h.triplet)[2] << ")";
          if (h.list_entry) out << "  " << *h.list_entry;
          out << "\n";
        }
      }
      return ok;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const ClassifierError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }
  return ok;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace walkgroups::cli

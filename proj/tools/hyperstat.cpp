// hyperstat command-line tool.
//
// Exit codes: 0 ok, 2 invalid parameters or input, 3 infinite divergence,
// 4 unsupported dimension, 5 fit failure, 6 --verify mismatch.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hyperstat/hyperstat.hpp"

namespace hb = hyperstat::hyperboloid;
namespace pc = hyperstat::poincare;
using hyperstat::LorentzParam;
using hyperstat::SpdParam2;
using json = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kInvalid = 2, kInfinite = 3, kDimension = 4, kFitFailure = 5, kVerifyFailed = 6 };

struct CliError {
  int code;
  std::string message;
};

// ---------------------------------------------------------------------------
// Output

std::string number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_json(std::ostream& os, const json& j, int indent, int level) {
  // indent 0 gives single-line output
  const std::string nl = indent > 0 ? "\n" : "";
  const std::string pad = nl + std::string(static_cast<std::size_t>(indent * (level + 1)), ' ');
  const std::string close = nl + std::string(static_cast<std::size_t>(indent * level), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << (indent > 0 ? "," : ", ");
        first = false;
        os << pad << json(k).dump() << ": ";
        write_json(os, v, indent, level + 1);
      }
      os << close << "}";
      return;
    }
    case json::value_t::array: {
      // arrays of scalars stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      os << "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << (flat || indent == 0 ? ", " : ",");
        first = false;
        if (!flat) os << pad;
        write_json(os, v, indent, level + 1);
      }
      if (!flat && !j.empty()) os << close;
      os << "]";
      return;
    }
    case json::value_t::number_float: os << number(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

std::string to_text(const json& j) {
  std::ostringstream os;
  write_json(os, j, 2, 0);
  os << "\n";
  return os.str();
}

void emit(const json& j, const std::string& out_path = "") {
  const std::string text = to_text(j);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw CliError{kInvalid, "cannot open output file " + out_path};
  f << text;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json triple_json(const hyperstat::InvariantTriple& s) { return json::array({s.s1, s.s2, s.s3}); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Parameter specs

using Param = std::variant<SpdParam2, LorentzParam>;

bool is_poincare(const Param& p) { return std::holds_alternative<SpdParam2>(p); }
const SpdParam2& spd(const Param& p) { return std::get<SpdParam2>(p); }
const LorentzParam& lorentz(const Param& p) { return std::get<LorentzParam>(p); }
const char* family_name(const Param& p) { return is_poincare(p) ? "poincare" : "hyperboloid"; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliError{kInvalid, what + ": malformed JSON (" + std::string(e.what()) + ")"};
  }
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw CliError{kInvalid, what + ": expected a number, got " + v.dump()};
  return v.get<double>();
}

std::vector<double> as_vector(const json& v, const std::string& what) {
  if (!v.is_array()) throw CliError{kInvalid, what + ": expected an array"};
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, what));
  return out;
}

SpdParam2 poincare_from_json(const json& v, const std::string& what) {
  if (v.is_object()) {
    for (const char* k : {"a", "b", "c"}) {
      if (!v.contains(k)) throw CliError{kInvalid, what + ": object form needs keys a, b, c"};
    }
    return SpdParam2(as_number(v["a"], what), as_number(v["b"], what), as_number(v["c"], what));
  }
  if (v.is_array() && v.size() == 2 && v[0].is_array() && v[1].is_array()) {
    const auto r0 = as_vector(v[0], what), r1 = as_vector(v[1], what);
    if (r0.size() != 2 || r1.size() != 2) throw CliError{kInvalid, what + ": matrix form must be 2x2"};
    Eigen::Matrix2d m;
    m << r0[0], r0[1], r1[0], r1[1];
    return SpdParam2::from_matrix(m);
  }
  throw CliError{kInvalid, what + ": poincare parameter must be [[a,b],[b,c]] or {\"a\":..,\"b\":..,\"c\":..}"};
}

LorentzParam hyperboloid_from_json(const json& v, const std::string& what) {
  const auto xs = as_vector(v, what);
  Eigen::VectorXd t(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) t(static_cast<Eigen::Index>(i)) = xs[i];
  return LorentzParam(t);
}

/// Accepted forms:
///   [[a,b],[b,c]] or {"a":..,"b":..,"c":..}        Poincare
///   [t0, t1, ..., td]                                hyperboloid
///   {"family": "poincare"|"hyperboloid", "theta": <one of the above>, "d": optional}
Param parse_param(const std::string& text, const std::string& what) {
  const json v = parse_json(text, what);
  if (v.is_object() && v.contains("family")) {
    if (!v["family"].is_string() || !v.contains("theta")) {
      throw CliError{kInvalid, what + ": {\"family\": .., \"theta\": ..} expected"};
    }
    const std::string fam = v["family"].get<std::string>();
    if (fam == "poincare") return poincare_from_json(v["theta"], what);
    if (fam == "hyperboloid") {
      LorentzParam p = hyperboloid_from_json(v["theta"], what);
      if (v.contains("d") && (!v["d"].is_number_integer() || v["d"].get<int>() != p.d())) {
        throw CliError{kInvalid, what + ": d does not match the length of theta"};
      }
      return p;
    }
    throw CliError{kInvalid, what + ": unknown family '" + fam + "'"};
  }
  if (v.is_object() || (v.is_array() && !v.empty() && v[0].is_array())) return poincare_from_json(v, what);
  if (v.is_array()) return hyperboloid_from_json(v, what);
  throw CliError{kInvalid, what + ": unrecognized parameter format"};
}

json param_json(const Param& p) {
  if (is_poincare(p)) {
    const auto& s = spd(p);
    return json::array({json::array({s.a(), s.b()}), json::array({s.b(), s.c()})});
  }
  json out = json::array();
  for (int i = 0; i <= lorentz(p).d(); ++i) out.push_back(lorentz(p)[i]);
  return out;
}

void require_same_family(const Param& p, const Param& q) {
  if (is_poincare(p) != is_poincare(q)) throw CliError{kInvalid, "--theta and --theta2 must belong to the same family"};
  if (!is_poincare(p) && lorentz(p).d() != lorentz(q).d()) {
    throw CliError{kInvalid, "--theta and --theta2 must have the same dimension"};
  }
}

hyperstat::InvariantTriple invariant(const Param& p, const Param& q) {
  return is_poincare(p) ? hyperstat::poincare_invariant(spd(p), spd(q)) : hyperstat::lorentz_invariant(lorentz(p), lorentz(q));
}

// ---------------------------------------------------------------------------
// Commands

struct PairArgs {
  std::string theta, theta2;
};

int cmd_divergence(const std::string& measure, const PairArgs& a, double alpha) {
  const Param p = parse_param(a.theta, "--theta"), q = parse_param(a.theta2, "--theta2");
  require_same_family(p, q);
  const bool P = is_poincare(p);
  json out;
  out["measure"] = measure;
  out["family"] = family_name(p);
  double value = 0.0;
  std::optional<double> arg;
  if (measure == "kl") {
    value = P ? pc::kld(spd(p), spd(q)) : hb::kld(lorentz(p), lorentz(q));
  } else if (measure == "hellinger") {
    value = P ? pc::hellinger_sq(spd(p), spd(q)) : hb::hellinger_sq(lorentz(p), lorentz(q));
  } else if (measure == "neyman") {
    value = P ? pc::neyman_chi2(spd(p), spd(q)) : hb::neyman_chi2(lorentz(p), lorentz(q));
  } else if (measure == "jeffreys") {
    value = P ? pc::jeffreys(spd(p), spd(q)) : hb::jeffreys(lorentz(p), lorentz(q));
  } else if (measure == "skew-jensen") {
    if (!(alpha > 0.0 && alpha < 1.0)) throw CliError{kInvalid, "--alpha must lie in (0, 1)"};
    value = P ? pc::skew_jensen(spd(p), spd(q), alpha) : hb::skew_jensen(lorentz(p), lorentz(q), alpha);
    arg = alpha;
  } else {
    const hyperstat::Extremum e = P ? pc::chernoff(spd(p), spd(q)) : hb::chernoff(lorentz(p), lorentz(q));
    value = e.value;
    arg = e.x;
  }
  out["value"] = finite_or_null(value);
  if (arg) out["alpha"] = *arg;
  out["invariant_triple"] = triple_json(invariant(p, q));
  out["finite"] = std::isfinite(value);
  emit(out);
  return std::isfinite(value) ? kOk : kInfinite;
}

int cmd_entropy(const std::string& theta) {
  const Param p = parse_param(theta, "--theta");
  json out;
  out["family"] = family_name(p);
  if (is_poincare(p)) {
    out["entropy"] = pc::entropy(spd(p));
    out["modified_entropy"] = pc::modified_entropy(spd(p));
  } else {
    // no closed form for the Lebesgue entropy on L^d
    out["entropy"] = nullptr;
    out["modified_entropy"] = hb::modified_entropy2(lorentz(p));
  }
  emit(out);
  return kOk;
}

int cmd_fim(const std::string& theta) {
  const Param p = parse_param(theta, "--theta");
  json out;
  out["family"] = family_name(p);
  if (is_poincare(p)) {
    out["coordinates"] = json::array({"a", "b", "c"});
    out["matrix"] = matrix_json(pc::fim(spd(p)));
  } else {
    json names = json::array();
    for (int i = 0; i <= lorentz(p).d(); ++i) names.push_back("theta" + std::to_string(i));
    out["coordinates"] = names;
    out["matrix"] = matrix_json(lorentz(p).d() == 2 ? Eigen::MatrixXd(hb::fim2(lorentz(p))) : hb::fim(lorentz(p)));
  }
  emit(out);
  return kOk;
}

int cmd_invariant(const PairArgs& a) {
  const Param p = parse_param(a.theta, "--theta"), q = parse_param(a.theta2, "--theta2");
  require_same_family(p, q);
  json out;
  out["family"] = family_name(p);
  out["invariant_triple"] = triple_json(invariant(p, q));
  emit(out);
  return kOk;
}

int cmd_sample(const std::string& theta, std::size_t n, std::uint64_t seed, const std::string& out_path) {
  const Param p = parse_param(theta, "--theta");
  if (!is_poincare(p) && lorentz(p).d() != 2) {
    throw hyperstat::unsupported_dimension("sampling is available for hyperboloid d = 2 only");
  }
  const hyperstat::RngStream stream = hyperstat::purpose_stream(seed, hyperstat::StreamPurpose::sampling);
  std::ostringstream os;
  std::string theta_text;
  write_json(os, param_json(p), 0, 0);
  theta_text = os.str();
  os.str("");
  os << "# family=" << family_name(p) << " theta=" << theta_text << " n=" << n << " seed=" << seed << "\n";
  char buf[96];
  if (is_poincare(p)) {
    os << "x,y\n";
    for (const auto& z : hyperstat::poincare_sample(spd(p), n, stream)) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.x(), z.y());
      os << buf;
    }
  } else {
    os << "x1,x2\n";
    for (const auto& x : hyperstat::hyperboloid_sample(lorentz(p), n, stream)) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], x[1]);
      os << buf;
    }
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw CliError{kInvalid, "cannot open output file " + out_path};
    f << os.str();
  }
  return kOk;
}

struct EstimateArgs {
  std::string measure = "tv", method = "plugin";
  PairArgs pair;
  std::size_t n = 1000000;
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  double eps = 1e-4;
  unsigned shards = 1;
  bool verify = false;
  bool probe_sup = false;
};

int cmd_estimate(const EstimateArgs& a) {
  namespace mc = hyperstat::mc;
  const Param p = parse_param(a.pair.theta, "--theta"), q = parse_param(a.pair.theta2, "--theta2");
  require_same_family(p, q);
  const LorentzParam lp = is_poincare(p) ? hyperstat::param_h_to_l(spd(p)) : lorentz(p);
  const LorentzParam lq = is_poincare(q) ? hyperstat::param_h_to_l(spd(q)) : lorentz(q);
  if (lp.d() != 2) throw hyperstat::unsupported_dimension("Monte Carlo estimation is available for d = 2 only");
  if (a.n < 1) throw CliError{kInvalid, "--n must be >= 1"};
  if (a.shards < 1) throw CliError{kInvalid, "--shards must be >= 1"};
  if (a.sigma && !(*a.sigma > 0.0)) throw CliError{kInvalid, "--sigma must be > 0"};
  if (!(a.eps > 0.0 && a.eps < 1.0)) throw CliError{kInvalid, "--eps must lie in (0, 1)"};
  if (a.verify && a.measure == "tv") throw CliError{kInvalid, "--verify needs a measure with a closed form (kl, hellinger, neyman)"};

  const mc::FGenerator f = a.measure == "tv"          ? mc::FGenerator::total_variation()
                           : a.measure == "kl"        ? mc::FGenerator::kl()
                           : a.measure == "hellinger" ? mc::FGenerator::squared_hellinger()
                                                      : mc::FGenerator::neyman_chi2();
  const mc::Method method = a.method == "plugin"         ? mc::Method::plugin
                            : a.method == "mc1-logistic" ? mc::Method::mc1_logistic
                            : a.method == "mc1-t7"       ? mc::Method::mc1_t7
                                                         : mc::Method::mc2;
  mc::EstimateOptions opt;
  opt.sigma = a.sigma;
  opt.eps = a.eps;
  opt.probe_sup = a.probe_sup;
  const mc::McEstimate e = mc::estimate(f, lp, lq, method, mc::McConfig{a.n, a.seed, a.shards}, opt);

  json out;
  out["measure"] = a.measure;
  out["method"] = e.method;
  out["family"] = family_name(p);
  out["estimate"] = finite_or_null(e.estimate);
  out["sample_variance"] = finite_or_null(e.sample_variance);
  out["standard_error"] = finite_or_null(e.standard_error());
  out["n"] = e.n;
  out["seed"] = a.seed;
  out["shards"] = e.shards;
  out["ci95"] = json::array({finite_or_null(e.ci95_lo), finite_or_null(e.ci95_hi)});
  out["sigma"] = e.sigma ? json(*e.sigma) : json(nullptr);
  out["eps"] = method == mc::Method::mc2 ? json(a.eps) : json(nullptr);
  out["sup_bound"] = e.sup_bound ? json(*e.sup_bound) : json(nullptr);
  out["tail_index"] = e.tail_index ? finite_or_null(*e.tail_index) : json(nullptr);
  out["infinite_variance_suspected"] = e.infinite_variance_suspected;

  int code = kOk;
  if (a.verify) {
    const double closed = a.measure == "kl"          ? hb::kld(lp, lq)
                          : a.measure == "hellinger" ? hb::hellinger_sq(lp, lq)
                                                     : hb::neyman_chi2(lp, lq);
    const double se = e.standard_error();
    const bool ok = std::isfinite(closed) && std::abs(e.estimate - closed) <= 4.0 * se;
    json v;
    v["closed_form"] = finite_or_null(closed);
    v["abs_error"] = finite_or_null(std::abs(e.estimate - closed));
    v["tolerance"] = finite_or_null(4.0 * se);
    v["passed"] = ok;
    out["verify"] = v;
    if (!std::isfinite(closed)) {
      code = kInfinite;
    } else if (!ok) {
      code = kVerifyFailed;
    }
  }
  emit(out);
  return code;
}

// CSV: '#' comments and blank lines skipped; an optional header row of names.
std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kInvalid, "cannot open input file " + path};
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0, width = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        const double x = std::stod(c, &used);
        if (c.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(x)) numeric = false;
        row.push_back(x);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        width = cells.size();
        continue;
      }
      throw CliError{kInvalid, path + ":" + std::to_string(lineno) + ": malformed row"};
    }
    header_allowed = false;
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw CliError{kInvalid, path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " columns"};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Family>
json fit_json(const hyperstat::EmResult<Family>& r, int d, std::size_t n) {
  json out;
  out["family"] = Family::name;
  out["d"] = d;
  out["k"] = r.mixture.k();
  out["n"] = n;
  out["weights"] = r.mixture.weights();
  json comps = json::array();
  for (const auto& c : r.mixture.components()) comps.push_back(param_json(Param(c)));
  out["components"] = comps;
  out["loglik"] = r.loglik;
  out["iterations"] = r.trace.iterations;
  out["converged"] = r.trace.converged;
  out["restarts"] = r.trace.restarts;
  return out;
}

int cmd_fit(const std::string& input, const std::string& family, std::size_t k, std::uint64_t seed,
            std::size_t max_iter, const std::string& out_path) {
  const auto rows = read_csv(input);
  if (rows.empty()) throw CliError{kInvalid, input + ": no data rows"};
  hyperstat::EmOptions opt;
  opt.max_iter = max_iter;
  json out;
  if (family == "poincare") {
    std::vector<hyperstat::UpperHalfPoint> pts;
    for (const auto& r : rows) {
      if (r.size() != 2) throw CliError{kInvalid, input + ": poincare data needs two columns x,y"};
      if (!(r[1] > 0.0)) throw CliError{kInvalid, input + ": upper half-plane points need y > 0"};
      pts.emplace_back(r[0], r[1]);
    }
    out = fit_json(hyperstat::em_fit<hyperstat::PoincareFamily>(pts, k, seed, opt), 2, pts.size());
  } else {
    std::vector<hyperstat::HyperboloidPoint> pts;
    for (const auto& r : rows) {
      if (r.size() < 2) throw CliError{kInvalid, input + ": hyperboloid data needs at least two columns"};
      pts.emplace_back(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
    }
    out = fit_json(hyperstat::em_fit<hyperstat::HyperboloidFamily>(pts, k, seed, opt), pts.front().d(), pts.size());
  }
  emit(out, out_path);
  return kOk;
}

std::pair<double, double> point2(const json& v) {
  const auto xs = as_vector(v, "--value");
  if (xs.size() != 2) throw CliError{kInvalid, "--value: a point must have two coordinates"};
  return {xs[0], xs[1]};
}

int cmd_convert(const std::string& what, const std::string& from, const std::string& to, const std::string& value) {
  const json v = parse_json(value, "--value");
  json result;
  if (what == "param") {
    if (from == "upper-half" && to == "hyperboloid") {
      result = param_json(hyperstat::param_h_to_l(poincare_from_json(v, "--value")));
    } else if (from == "hyperboloid" && to == "upper-half") {
      result = param_json(hyperstat::param_l_to_h(hyperboloid_from_json(v, "--value")));
    } else if (from == to && from != "disk") {
      result = from == "upper-half" ? param_json(poincare_from_json(v, "--value")) : param_json(hyperboloid_from_json(v, "--value"));
    } else {
      throw CliError{kInvalid, "parameter conversion is supported between upper-half and hyperboloid only"};
    }
  } else {
    const auto [u, w] = point2(v);
    // route everything through the upper half-plane
    hyperstat::UpperHalfPoint z(0.0, 1.0);
    if (from == "upper-half") {
      z = hyperstat::UpperHalfPoint(u, w);
    } else if (from == "hyperboloid") {
      z = hyperstat::point_l_to_h(hyperstat::HyperboloidPoint(u, w));
    } else {
      z = hyperstat::point_disk_to_h(u, w);
    }
    if (to == "upper-half") {
      result = json::array({z.x(), z.y()});
    } else if (to == "hyperboloid") {
      const auto h = hyperstat::point_h_to_l(z);
      result = json::array({h[0], h[1]});
    } else {
      const auto [du, dv] = hyperstat::point_h_to_disk(z);
      result = json::array({du, dv});
    }
    if (from == to) result = json::array({u, w});
  }
  json out;
  out["what"] = what;
  out["from"] = from;
  out["to"] = to;
  out["value"] = result;
  emit(out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic exponential families: divergences, sampling, estimation and mixture fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hyperstat 0.1.0");
  int code = kOk;
  std::function<int()> action;

  const std::vector<std::string> measures = {"kl", "hellinger", "neyman", "jeffreys", "skew-jensen", "chernoff"};
  const std::string spec_help = "parameter: [[a,b],[b,c]], {\"a\":..,\"b\":..,\"c\":..}, [t0,...,td] or "
                                "{\"family\":..,\"theta\":..}";

  std::string measure;
  PairArgs pair;
  double alpha = 0.5;
  auto* div = app.add_subcommand("divergence", "closed-form divergence between two parameters");
  div->add_option("--measure", measure, "divergence")->required()->check(CLI::IsMember(measures));
  div->add_option("--theta", pair.theta, spec_help)->required();
  div->add_option("--theta2", pair.theta2, "second parameter")->required();
  div->add_option("--alpha", alpha, "skew for skew-jensen")->capture_default_str();
  div->callback([&] { action = [&] { return cmd_divergence(measure, pair, alpha); }; });

  std::string theta;
  auto* ent = app.add_subcommand("entropy", "differential and modified entropy");
  ent->add_option("--theta", theta, spec_help)->required();
  ent->callback([&] { action = [&] { return cmd_entropy(theta); }; });

  auto* fim = app.add_subcommand("fim", "Fisher information matrix");
  fim->add_option("--theta", theta, spec_help)->required();
  fim->callback([&] { action = [&] { return cmd_fim(theta); }; });

  auto* inv = app.add_subcommand("invariant", "maximal invariant triple of a parameter pair");
  inv->add_option("--theta", pair.theta, spec_help)->required();
  inv->add_option("--theta2", pair.theta2, "second parameter")->required();
  inv->callback([&] { action = [&] { return cmd_invariant(pair); }; });

  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  auto* smp = app.add_subcommand("sample", "draw variates as CSV");
  smp->add_option("--theta", theta, spec_help)->required();
  smp->add_option("--n", n, "number of draws")->required();
  smp->add_option("--seed", seed, "random seed")->required();
  smp->add_option("--out", out_path, "output file (default stdout)");
  smp->callback([&] { action = [&] { return cmd_sample(theta, n, seed, out_path); }; });

  EstimateArgs est;
  double sigma = 0.0;
  auto* esc = app.add_subcommand("estimate", "Monte Carlo f-divergence estimate");
  esc->add_option("--measure", est.measure, "f-divergence")->required()->check(CLI::IsMember({"tv", "kl", "hellinger", "neyman"}));
  esc->add_option("--method", est.method, "estimator")
      ->required()
      ->check(CLI::IsMember({"plugin", "mc1-logistic", "mc1-t7", "mc2"}));
  esc->add_option("--theta", est.pair.theta, spec_help)->required();
  esc->add_option("--theta2", est.pair.theta2, "second parameter")->required();
  esc->add_option("--n", est.n, "sample size")->capture_default_str();
  esc->add_option("--seed", est.seed, "random seed")->capture_default_str();
  auto* sigma_opt = esc->add_option("--sigma", sigma, "MC1 proposal scale (optimized when absent)");
  esc->add_option("--eps", est.eps, "MC2 truncation")->capture_default_str();
  esc->add_option("--shards", est.shards, "independent substreams")->capture_default_str();
  esc->add_flag("--verify", est.verify, "exit 6 unless within 4 standard errors of the closed form");
  esc->add_flag("--probe-sup", est.probe_sup, "report a grid probe of the MC1 integrand supremum");
  esc->callback([&] {
    if (sigma_opt->count() > 0) est.sigma = sigma;
    action = [&] { return cmd_estimate(est); };
  });

  std::string input, family;
  std::size_t k = 1, max_iter = 200;
  auto* fit = app.add_subcommand("fit", "fit a mixture by EM");
  fit->add_option("--input", input, "CSV of points")->required();
  fit->add_option("--family", family, "poincare or hyperboloid")->required()->check(CLI::IsMember({"poincare", "hyperboloid"}));
  fit->add_option("--k", k, "number of components")->required();
  fit->add_option("--seed", seed, "random seed")->capture_default_str();
  fit->add_option("--max-iter", max_iter, "EM iteration cap")->capture_default_str();
  fit->add_option("--out", out_path, "model file (default stdout)");
  fit->callback([&] { action = [&] { return cmd_fit(input, family, k, seed, max_iter, out_path); }; });

  std::string what, from, to, value;
  const std::vector<std::string> models = {"upper-half", "hyperboloid", "disk"};
  auto* cnv = app.add_subcommand("convert", "convert parameters or points between models");
  cnv->add_option("--what", what, "param or point")->required()->check(CLI::IsMember({"param", "point"}));
  cnv->add_option("--from", from, "source model")->required()->check(CLI::IsMember(models));
  cnv->add_option("--to", to, "target model")->required()->check(CLI::IsMember(models));
  cnv->add_option("--value", value, "JSON value")->required();
  cnv->callback([&] { action = [&] { return cmd_convert(what, from, to, value); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    code = action();
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const hyperstat::unsupported_dimension& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDimension;
  } catch (const hyperstat::em_failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFitFailure;
  } catch (const std::exception& e) {
    // cone violations, domain errors and bad arguments
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  std::cout.flush();
  return code;
}

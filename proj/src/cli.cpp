#include "entsampler/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "entsampler/entropy.hpp"
#include "entsampler/error.hpp"
#include "entsampler/io.hpp"
#include "entsampler/rates.hpp"
#include "entsampler/rng.hpp"
#include "entsampler/verify.hpp"
#include "entsampler/wsesim.hpp"
#include "json.hpp"

namespace entsampler::cli {

using nlohmann::json;

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfDomain:
    case ErrorCode::DimMismatch:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::NotPrime:
      return kUsageError;
    default:
      return kNumericFailure;
  }
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

// ---- entropy ---------------------------------------------------------------

struct EntropyArgs {
  std::string file;
  std::string measure = "h2";
  std::string split = "A|E";
  double sdp_tol = kSdpTolerance;
  bool json_out = false;
};

int cmd_entropy(const EntropyArgs& a, std::ostream& out) {
  const StateFile state = read_state_file(a.file);
  const Bipartition split = parse_split(state, a.split);
  json j{{"file", a.file}, {"measure", a.measure}, {"split", a.split}};
  double value = 0.0;
  if (a.measure == "h2") {
    const EntropyResult r = h2_cond(state.rho, split);
    value = r.value;
    j["collision_mass"] = r.collision_mass;
  } else if (a.measure == "hmin") {
    const auto [r, sdp] = hmin_cond(state.rho, split, a.sdp_tol);
    value = r.value;
    j["guessing_mass"] = r.collision_mass;
    j["duality_gap"] = sdp.duality_gap;
    j["iterations"] = sdp.iterations;
  } else {
    value = pretty_good_fidelity(state.rho, split).fidelity;
  }
  j["value"] = value;
  if (a.json_out) {
    out << j.dump() << '\n';
  } else {
    out << format_value(value) << '\n';
  }
  return kPass;
}

// ---- curve -----------------------------------------------------------------

struct CurveArgs {
  std::string function;
  int d = 2;
  int grid = 512;
  std::string out_path;
  std::vector<double> at;
};

int cmd_curve(const CurveArgs& a, std::ostream& out) {
  const CurveFunction f = parse_curve_function(a.function);
  RateCurve curve;
  if (a.at.empty()) {
    if (a.grid < 2) throw Error(ErrorCode::InvalidArgument, "--grid needs at least 2 points");
    curve = sample_curve(f, a.d, a.grid);
  } else {
    curve.function = f;
    curve.d = a.d;
    for (double x : a.at) {
      curve.x.push_back(x);
      curve.y.push_back(evaluate_curve(f, a.d, x));
    }
  }
  if (a.out_path.empty()) {
    write_curve_csv(out, curve);
  } else {
    std::ofstream file(a.out_path);
    if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + a.out_path + "'");
    write_curve_csv(file, curve);
  }
  return kPass;
}

// ---- verify ----------------------------------------------------------------

// Strict reader over a suite configuration: unknown keys and wrong types are
// rejected, and every value used (given or defaulted) is recorded.
class SuiteConfig {
 public:
  SuiteConfig(const json& j, std::set<std::string> allowed) : given_(j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (!allowed.count(key)) throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
    }
  }

  std::vector<int> ints(const std::string& key, std::vector<int> def) {
    std::vector<int> v = def;
    if (given_.contains(key)) {
      const json& x = given_[key];
      v.clear();
      if (x.is_number_integer()) {
        v.push_back(x.get<int>());
      } else if (x.is_array() && !x.empty()) {
        for (const auto& e : x) {
          if (!e.is_number_integer()) bad(key, "integers");
          v.push_back(e.get<int>());
        }
      } else {
        bad(key, "an integer or a nonempty integer array");
      }
    }
    effective_[key] = v;
    return v;
  }

  // nullopt stands for "all".
  std::optional<std::vector<int>> ints_or_all(const std::string& key) {
    if (!given_.contains(key) || given_[key] == "all") {
      effective_[key] = "all";
      return std::nullopt;
    }
    return ints(key, {});
  }

  int integer(const std::string& key, int def) {
    int v = def;
    if (given_.contains(key)) {
      if (!given_[key].is_number_integer()) bad(key, "an integer");
      v = given_[key].get<int>();
    }
    effective_[key] = v;
    return v;
  }

  double number(const std::string& key, double def) {
    double v = def;
    if (given_.contains(key)) {
      if (!given_[key].is_number()) bad(key, "a number");
      v = given_[key].get<double>();
    }
    effective_[key] = v;
    return v;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> def) {
    std::vector<std::string> v = def;
    if (given_.contains(key)) {
      const json& x = given_[key];
      v.clear();
      if (x.is_string()) {
        v.push_back(x.get<std::string>());
      } else if (x.is_array() && !x.empty()) {
        for (const auto& e : x) {
          if (!e.is_string()) bad(key, "strings");
          v.push_back(e.get<std::string>());
        }
      } else {
        bad(key, "a string or a nonempty string array");
      }
    }
    effective_[key] = v;
    return v;
  }

  std::string string(const std::string& key, const std::string& def) {
    std::string v = def;
    if (given_.contains(key)) {
      if (!given_[key].is_string()) bad(key, "a string");
      v = given_[key].get<std::string>();
    }
    effective_[key] = v;
    return v;
  }

  void set(const std::string& key, json v) { effective_[key] = std::move(v); }
  const json& effective() const { return effective_; }

 private:
  [[noreturn]] static void bad(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ParseError, "config key '" + key + "' must be " + what);
  }

  json given_;
  json effective_ = json::object();
};

StateSource parse_source(const std::string& id) {
  if (id == "random") return StateSource::Random;
  if (id == "max-entangled") return StateSource::MaxEntangled;
  throw Error(ErrorCode::ParseError, "state must be 'random' or 'max-entangled', got '" + id + "'");
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

void require_positive(const std::vector<int>& v, const std::string& key) {
  for (int x : v) {
    if (x < 1) throw Error(ErrorCode::ParseError, "config key '" + key + "' must be positive");
  }
}

VerificationReport suite_theorem1(SuiteConfig& c, std::uint64_t seed, int jobs) {
  const auto maps = c.strings("maps", {"sampling", "cq_sampling", "bb84", "mub"});
  const auto ns = c.ints("n", {1, 2, 3});
  const auto ds = c.ints("d", {2});
  const int trials = c.integer("trials", 200);
  const StateSource source = parse_source(c.string("state", "random"));
  require_positive(ns, "n");
  require_positive({trials}, "trials");
  std::vector<MapKind> kinds;
  for (const auto& m : maps) kinds.push_back(parse_map_kind(m));
  VerificationReport rep;
  for (MapKind kind : kinds) {
    for (int n : ns) {
      for (int d : ds) {
        if (kind == MapKind::Bb84 && d != 2) continue;
        rep.merge(verify_theorem1(kind, n, d, trials, seed, {source, jobs}));
      }
    }
  }
  return rep;
}

VerificationReport suite_sampling(SuiteConfig& c, std::uint64_t seed, int jobs) {
  const auto ns = c.ints("n", range(1, 5));
  const auto ks = c.ints_or_all("k");
  const auto ds = c.ints("d", {2});
  const int trials = c.integer("trials", 100);
  const std::string classical = c.string("classical", "both");
  require_positive(ns, "n");
  require_positive({trials}, "trials");
  std::vector<bool> modes;
  if (classical == "both" || classical == "no") modes.push_back(false);
  if (classical == "both" || classical == "yes") modes.push_back(true);
  if (modes.empty()) throw Error(ErrorCode::ParseError, "config key 'classical' must be 'yes', 'no' or 'both'");
  VerificationReport rep;
  for (bool cl : modes) {
    for (int d : ds) {
      for (int n : ns) {
        for (int k : ks ? *ks : range(1, n)) {
          if (k > n) continue;
          rep.merge(verify_sampling(n, k, d, trials, seed, cl, {jobs}));
        }
      }
    }
  }
  return rep;
}

VerificationReport suite_uncertainty(SuiteConfig& c, std::uint64_t seed, int jobs) {
  const auto maps = c.strings("maps", {"bb84", "mub"});
  const auto ns = c.ints("n", {1, 2, 3});
  const auto ds = c.ints("d", {2});
  const int trials = c.integer("trials", 50);
  const StateSource source = parse_source(c.string("state", "random"));
  require_positive(ns, "n");
  require_positive({trials}, "trials");
  VerificationReport rep;
  for (const auto& m : maps) {
    const MapKind kind = parse_map_kind(m);
    for (int n : ns) {
      for (int d : ds) {
        if (kind == MapKind::Bb84 && d != 2) continue;
        rep.merge(verify_uncertainty(kind, n, d, trials, seed, {source, jobs}));
      }
    }
  }
  return rep;
}

VerificationReport suite_lemmas(SuiteConfig& c, std::uint64_t seed, int jobs) {
  LemmaConfig lc;
  lc.seed = seed;
  lc.jobs = jobs;
  lc.sandwich_states = c.integer("sandwich_states", lc.sandwich_states);
  lc.condition_states = c.integer("condition_states", lc.condition_states);
  lc.d2_pairs = c.integer("d2_pairs", lc.d2_pairs);
  lc.d2_channels = c.integer("d2_channels", lc.d2_channels);
  lc.h2again_states = c.integer("h2again_states", lc.h2again_states);
  lc.gamma_grid = c.integer("gamma_grid", lc.gamma_grid);
  lc.binomial_max_n = c.integer("binomial_max_n", lc.binomial_max_n);
  lc.sum_binomial_max_n = c.integer("sum_binomial_max_n", lc.sum_binomial_max_n);
  lc.swap_instances = c.integer("swap_instances", lc.swap_instances);
  for (int v : {lc.sandwich_states, lc.condition_states, lc.d2_pairs, lc.d2_channels, lc.h2again_states,
                lc.gamma_grid, lc.binomial_max_n, lc.sum_binomial_max_n, lc.swap_instances}) {
    if (v < 0) throw Error(ErrorCode::ParseError, "lemma counts must be nonnegative");
  }
  return verify_lemmas(lc);
}

VerificationReport suite_upper(SuiteConfig& c) {
  const auto ns = c.ints("n", range(1, 5));
  const auto ds = c.ints("d", {2, 3});
  const auto ws = c.ints_or_all("w");
  const auto ks = c.ints_or_all("k");
  require_positive(ns, "n");
  VerificationReport rep;
  for (int d : ds) {
    for (int n : ns) {
      for (int w : ws ? *ws : range(0, n)) {
        if (w > n) continue;
        for (int k : ks ? *ks : range(1, n)) {
          if (k > n) continue;
          rep.merge(verify_upper_bounds(n, d, w, k));
        }
      }
    }
  }
  return rep;
}

VerificationReport suite_wse(SuiteConfig& c) {
  const auto ns = c.ints("n", {1, 2, 3});
  const auto qs = c.ints_or_all("q");
  const auto ids = c.strings("strategies", {"store-first-q", "measure-rest-fixed", "measure-rest-random"});
  const double tol = c.number("tolerance", 1e-6);
  require_positive(ns, "n");
  std::vector<AttackStrategy> strategies;
  for (const auto& id : ids) strategies.push_back(parse_attack_strategy(id));
  VerificationReport rep;
  for (int n : ns) {
    for (int q : qs ? *qs : range(0, n)) {
      if (q > n) continue;
      rep.merge(check_bqsm_bound(n, q, strategies, tol));
    }
  }
  return rep;
}

struct VerifyArgs {
  std::string suite;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  int jobs = 1;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  json given = json::object();
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open config '" + a.config_path + "'");
    try {
      given = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, "config '" + a.config_path + "' is not valid JSON: " + e.what());
    }
  }
  if (a.jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be positive");

  static const std::map<std::string, std::set<std::string>> keys = {
      {"theorem1", {"maps", "n", "d", "trials", "state"}},
      {"sampling", {"n", "k", "d", "trials", "classical"}},
      {"uncertainty", {"maps", "n", "d", "trials", "state"}},
      {"lemmas",
       {"sandwich_states", "condition_states", "d2_pairs", "d2_channels", "h2again_states", "gamma_grid",
        "binomial_max_n", "sum_binomial_max_n", "swap_instances"}},
      {"upper", {"n", "d", "w", "k"}},
      {"wse", {"n", "q", "strategies", "tolerance"}},
  };
  SuiteConfig c(given, keys.at(a.suite));

  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  if (a.suite == "theorem1") {
    rep = suite_theorem1(c, a.seed, a.jobs);
  } else if (a.suite == "sampling") {
    rep = suite_sampling(c, a.seed, a.jobs);
  } else if (a.suite == "uncertainty") {
    rep = suite_uncertainty(c, a.seed, a.jobs);
  } else if (a.suite == "lemmas") {
    rep = suite_lemmas(c, a.seed, a.jobs);
  } else if (a.suite == "upper") {
    rep = suite_upper(c);
  } else {
    rep = suite_wse(c);
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.suite = a.suite;
  c.set("seed", a.seed);
  rep.config = c.effective().dump();

  const json j = report_to_json(rep);
  if (!a.out_path.empty()) {
    std::ofstream file(a.out_path);
    if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + a.out_path + "'");
    file << j.dump(2) << '\n';
  }
  out << "suite: " << rep.suite << '\n'
      << "records: " << rep.records.size() << '\n'
      << "trials: " << rep.trials << '\n'
      << "failures: " << rep.failures << '\n'
      << "worst_slack: " << format_value(rep.worst_slack) << '\n'
      << "worst_equality_error: " << rep.worst_equality_error << '\n';
  for (const auto& [name, s] : j["summary"]["checks"].items()) {
    out << "  " << name << ": records=" << s["records"].get<long long>()
        << " failures=" << s["failures"].get<long long>();
    if (!s["worst_slack"].is_null()) out << " worst_slack=" << format_value(s["worst_slack"].get<double>());
    out << '\n';
  }
  out << "runtime_seconds: " << rep.runtime_seconds << '\n'
      << "result: " << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? kPass : kVerificationFailure;
}

// ---- calc ------------------------------------------------------------------

struct CalcArgs {
  std::vector<double> wse_bqsm, wse_nsm;
  std::vector<int> rac_q, rac_c;
  bool json_out = false;
};

int cmd_calc(const CalcArgs& a, std::ostream& out, std::ostream& err) {
  const int chosen = !a.wse_bqsm.empty() + !a.wse_nsm.empty() + !a.rac_q.empty() + !a.rac_c.empty();
  if (chosen != 1) {
    throw Error(ErrorCode::InvalidArgument, "calc needs exactly one of --wse-bqsm, --wse-nsm, --rac-q, --rac-c");
  }
  json j;
  BoundValue v;
  bool wse = false;
  if (!a.wse_bqsm.empty()) {
    v = wse_lambda_bqsm(a.wse_bqsm[0], a.wse_bqsm[1]);
    j = {{"calc", "wse-bqsm"}, {"n", a.wse_bqsm[0]}, {"q", a.wse_bqsm[1]}};
    wse = true;
  } else if (!a.wse_nsm.empty()) {
    v = wse_lambda_nsm(a.wse_nsm[0], a.wse_nsm[1]);
    j = {{"calc", "wse-nsm"}, {"n", a.wse_nsm[0]}, {"eta", a.wse_nsm[1]}};
    wse = true;
  } else if (!a.rac_q.empty()) {
    v = rac_quantum_bound(a.rac_q[0], a.rac_q[1], a.rac_q[2], a.rac_q[3]);
    j = {{"calc", "rac-q"}, {"n", a.rac_q[0]}, {"m", a.rac_q[1]}, {"k", a.rac_q[2]}, {"d", a.rac_q[3]}};
  } else {
    v = rac_classical_bound(a.rac_c[0], a.rac_c[1], a.rac_c[2]);
    j = {{"calc", "rac-c"}, {"n", a.rac_c[0]}, {"m", a.rac_c[1]}, {"k", a.rac_c[2]}};
  }
  print_warnings(v.warnings, err);
  const bool secure = v.value > 0;
  if (a.json_out) {
    j[wse ? "lambda" : "bound"] = json_number(v.value);
    if (wse) j["secure"] = secure;
    j["warnings"] = v.warnings;
    out << j.dump() << '\n';
  } else if (wse) {
    out << "lambda = " << format_value(v.value) << '\n' << "secure: " << (secure ? "yes" : "no") << '\n';
  } else {
    out << "bound = " << format_value(v.value) << '\n';
  }
  return kPass;
}

// ---- state -----------------------------------------------------------------

struct StateArgs {
  std::string kind;
  int d = 2;
  int n = 1;
  int w = 0;
  int env_dim = 1;
  int rank = 0;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_state(const StateArgs& a, std::ostream& out) {
  if (a.d < 2 || a.n < 1 || a.env_dim < 1) {
    throw Error(ErrorCode::InvalidArgument, "state needs d >= 2, n >= 1, env-dim >= 1");
  }
  StateFile s;
  const Dims sites(a.n, a.d);
  if (a.kind == "max-entangled" || a.kind == "maximally-mixed" || a.kind == "corrupted-epr") {
    if (a.kind == "max-entangled") {
      s.rho = max_entangled(a.d, a.n, true);
    } else if (a.kind == "corrupted-epr") {
      s.rho = corrupted_epr(a.n, a.d, a.w);
    } else {
      const std::int64_t dim = total_dim(sites) * total_dim(sites);
      s.rho = {Matrix::Identity(dim, dim) / static_cast<double>(dim), Dims(2 * a.n, a.d), true};
    }
    s.subsystems = {{"A", sites}, {"E", sites}};
  } else if (a.kind == "random") {
    Dims dims = sites;
    if (a.env_dim > 1) dims.push_back(a.env_dim);
    const int rank = a.rank > 0 ? a.rank : static_cast<int>(total_dim(dims));
    s.rho = random_state(dims, rank, Rng(a.seed).split("state").next_u64());
    s.subsystems = {{"A", sites}};
    if (a.env_dim > 1) s.subsystems.push_back({"E", {a.env_dim}});
  } else if (a.kind == "fixed-weight") {
    s.rho = fixed_weight_classical(a.n, a.d, a.w);
    s.subsystems = {{"A", sites}};
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown state kind '" + a.kind +
                    "' (max-entangled, maximally-mixed, corrupted-epr, random, fixed-weight)");
  }
  if (a.out_path.empty()) {
    out << state_to_json(s) << '\n';
  } else {
    write_state_file(a.out_path, s);
  }
  return kPass;
}

// ---- wse -------------------------------------------------------------------

struct WseArgs {
  int n = 8;
  int runs = 1;
  std::uint64_t seed = 1;
  bool purified = false;
  std::string out_path;
};

int cmd_wse(const WseArgs& a, std::ostream& out) {
  if (a.runs < 1) throw Error(ErrorCode::InvalidArgument, "--runs must be positive");
  const Rng root(a.seed);
  std::vector<WseTranscript> ts;
  for (int r = 0; r < a.runs; ++r) {
    const std::uint64_t s = root.split("wse").split(static_cast<std::uint64_t>(r)).key();
    ts.push_back(a.purified ? run_honest_purified(a.n, s) : run_honest(a.n, s));
  }
  if (a.out_path.empty()) {
    write_transcripts_jsonl(out, ts);
  } else {
    std::ofstream file(a.out_path);
    if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + a.out_path + "'");
    write_transcripts_jsonl(file, ts);
  }
  return kPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy sampling and uncertainty relation toolkit", "entsampler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "entsampler 1.0");

  EntropyArgs ea;
  auto* entropy = app.add_subcommand("entropy", "Conditional entropy of a state file");
  entropy->add_option("file", ea.file, "State file (JSON)")->required();
  entropy->add_option("--measure", ea.measure, "h2, hmin or pg-fidelity")
      ->check(CLI::IsMember({"h2", "hmin", "pg-fidelity"}));
  entropy->add_option("--split", ea.split, "Subsystems as 'A|E'; names may be joined with ','");
  entropy->add_option("--sdp-tol", ea.sdp_tol, "Duality gap target for hmin")->check(CLI::PositiveNumber);
  entropy->add_flag("--json", ea.json_out, "Print a JSON object");

  CurveArgs ca;
  auto* curve = app.add_subcommand("curve", "Sample a rate curve as CSV");
  curve->add_option("--function", ca.function, "R, C, gamma, gamma_d, upper_qq or upper_cq")
      ->required()
      ->check(CLI::IsMember({"R", "C", "gamma", "gamma_d", "upper_qq", "upper_cq"}));
  curve->add_option("--d", ca.d, "Local dimension");
  curve->add_option("--grid", ca.grid, "Number of grid points");
  curve->add_option("--out", ca.out_path, "Output CSV (stdout if omitted)");
  curve->add_option("--at", ca.at, "Evaluate at these points instead of a grid");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", va.suite, "theorem1, sampling, uncertainty, lemmas, upper or wse")
      ->required()
      ->check(CLI::IsMember({"theorem1", "sampling", "uncertainty", "lemmas", "upper", "wse"}));
  verify->add_option("--config", va.config_path, "Suite configuration (JSON)");
  verify->add_option("--out", va.out_path, "Report output (JSON)");
  verify->add_option("--seed", va.seed, "Root seed");
  verify->add_option("--jobs", va.jobs, "Worker threads");

  CalcArgs cc;
  auto* calc = app.add_subcommand("calc", "Evaluate a security or RAC bound");
  calc->add_option("--wse-bqsm", cc.wse_bqsm, "n q")->expected(2);
  calc->add_option("--wse-nsm", cc.wse_nsm, "n eta")->expected(2);
  calc->add_option("--rac-q", cc.rac_q, "n m k d")->expected(4);
  calc->add_option("--rac-c", cc.rac_c, "n m k")->expected(3);
  calc->add_flag("--json", cc.json_out, "Print a JSON object");

  StateArgs sa;
  auto* state = app.add_subcommand("state", "Write a fixture state file");
  state->add_option("--kind", sa.kind, "max-entangled, maximally-mixed, corrupted-epr, random, fixed-weight")
      ->required();
  state->add_option("--d", sa.d, "Local dimension");
  state->add_option("--n", sa.n, "Number of sites");
  state->add_option("--w", sa.w, "Error weight (corrupted-epr, fixed-weight)");
  state->add_option("--env-dim", sa.env_dim, "Environment dimension (random)");
  state->add_option("--rank", sa.rank, "Rank (random; full if omitted)");
  state->add_option("--seed", sa.seed, "Root seed");
  state->add_option("--out", sa.out_path, "Output state file (stdout if omitted)");

  WseArgs wa;
  auto* wse = app.add_subcommand("wse", "Honest weak string erasure transcripts as JSON lines");
  wse->add_option("--n", wa.n, "Qubits per run")->check(CLI::PositiveNumber);
  wse->add_option("--runs", wa.runs, "Number of runs");
  wse->add_option("--seed", wa.seed, "Root seed");
  wse->add_flag("--purified", wa.purified, "Use the EPR-pair form of the protocol");
  wse->add_option("--out", wa.out_path, "Output file (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (entropy->parsed()) return cmd_entropy(ea, out);
    if (curve->parsed()) return cmd_curve(ca, out);
    if (verify->parsed()) return cmd_verify(va, out);
    if (calc->parsed()) return cmd_calc(cc, out, err);
    if (state->parsed()) return cmd_state(sa, out);
    if (wse->parsed()) return cmd_wse(wa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kUsageError;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace entsampler::cli

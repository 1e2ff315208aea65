#pragma once

// Subcommands of the urnent tool. Each returns a process exit code:
// 0 success, 1 invariant violation, 2 usage or configuration error.

#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urnent/bounds.hpp"
#include "urnent/definetti.hpp"
#include "urnent/divergence.hpp"
#include "urnent/io.hpp"
#include "urnent/oracle.hpp"
#include "urnent/parallel.hpp"
#include "urnent/verify.hpp"

namespace urnent::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2 };

enum class Format { csv, json };

struct GlobalOptions {
  Format format = Format::csv;
  std::string out;  // empty: standard output
  unsigned threads = 1;
  int precision_bits = 128;
};

/// Parameters of a figure sweep: two colours, ell = (l, n - l) for l in
/// ell_range (default 1..n/2).
struct SweepConfig {
  std::int64_t n = 100;
  std::int64_t k = 30;
  std::int64_t c = 2;
  std::string ell_range;  // "a:b[:step]" or a comma list
  std::string plot;       // optional SVG path
};

namespace detail {

inline void emit(const GlobalOptions& g, const std::string& content, std::ostream& out) {
  if (g.out.empty())
    out << content;
  else
    io::write_atomic(g.out, content);
}

inline std::string render(const GlobalOptions& g, const io::Table& t) {
  return g.format == Format::json ? io::to_json(t) : io::to_csv(t);
}

inline std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw domain_error("not an integer list: " + text);
    }
    if (used != item.size()) throw domain_error("not an integer list: " + text);
    out.push_back(v);
  }
  if (out.empty()) throw domain_error("empty integer list");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw domain_error("not a number list: " + text);
    }
    if (used != item.size()) throw domain_error("not a number list: " + text);
    out.push_back(v);
  }
  if (out.empty()) throw domain_error("empty number list");
  return out;
}

/// "a:b" or "a:b:step" inclusive, or a comma list.
inline std::vector<std::int64_t> parse_range(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_int_list(text);
  std::string spec = text;
  for (auto& ch : spec)
    if (ch == ':') ch = ',';
  const auto parts = parse_int_list(spec);
  if (parts.size() < 2 || parts.size() > 3) throw domain_error("range must be a:b or a:b:step");
  const std::int64_t step = parts.size() == 3 ? parts[2] : 1;
  if (step < 1 || parts[0] > parts[1]) throw domain_error("bad range " + text);
  std::vector<std::int64_t> out;
  for (std::int64_t v = parts[0]; v <= parts[1]; v += step) out.push_back(v);
  return out;
}

inline io::Cell opt(const std::optional<double>& v) { return io::optional_cell(v); }

}  // namespace detail

/// Figure table: exact D and every bound along ell = 1..n/2. Also returns
/// the number of rows where some upper bound falls below exact_D.
inline io::Table figure_table(const SweepConfig& cfg, unsigned threads, std::int64_t* violations = nullptr) {
  urnent::detail::require(cfg.c == 2, "figure: only c = 2 is supported");
  urnent::detail::require(cfg.n >= 2 && cfg.k >= 1 && cfg.k <= cfg.n, "figure: need n >= 2 and 1 <= k <= n");
  io::Table t;
  t.columns = {"ell", "exact_D", "stam_upper", "stam_lower", "hm_upper", "hm_lower", "thm1_upper", "prop12_upper"};
  std::vector<std::int64_t> ls;
  if (cfg.ell_range.empty())
    for (std::int64_t l = 1; l <= cfg.n / 2; ++l) ls.push_back(l);
  else
    ls = detail::parse_range(cfg.ell_range);
  for (auto l : ls) urnent::detail::require(l >= 1 && l < cfg.n, "figure: ell must lie in 1..n-1");
  struct Row {
    double d = 0.0;
    BoundReport rep;
  };
  const auto rows = parallel_map<Row>(ls.size(), threads, [&](std::size_t i) {
    const std::int64_t l = ls[i];
    const UrnSpec spec(cfg.k, {l, cfg.n - l});
    return Row{relative_entropy(spec), bound_report(spec)};
  });
  std::int64_t bad = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (const auto& ub : {r.rep.stam_upper, r.rep.hm_upper, r.rep.thm1_upper, r.rep.prop12_upper})
      if (ub && r.d > *ub + 1e-10) {
        ++bad;
        break;
      }
    t.add_row({ls[i], r.d, detail::opt(r.rep.stam_upper), detail::opt(r.rep.stam_lower),
               detail::opt(r.rep.hm_upper), detail::opt(r.rep.hm_lower), detail::opt(r.rep.thm1_upper),
               detail::opt(r.rep.prop12_upper)});
  }
  if (violations) *violations = bad;
  return t;
}

/// Exact values as circles, uniform bounds solid, new bounds dashed/dotted.
inline std::string figure_svg(const SweepConfig& cfg, const io::Table& t) {
  std::vector<double> x;
  std::vector<io::Series> series{{"exact D", {}, io::SeriesStyle::circles},
                                 {"Stam upper", {}, io::SeriesStyle::solid},
                                 {"HM upper", {}, io::SeriesStyle::solid},
                                 {"Thm 1.1", {}, io::SeriesStyle::dashed},
                                 {"Prop 1.2", {}, io::SeriesStyle::dotted}};
  const std::vector<std::string> cols{"exact_D", "stam_upper", "hm_upper", "thm1_upper", "prop12_upper"};
  auto num = [](const io::Cell& c) {
    if (auto p = std::get_if<double>(&c)) return *p;
    return std::numeric_limits<double>::quiet_NaN();
  };
  for (const auto& row : t.rows) {
    x.push_back(static_cast<double>(std::get<std::int64_t>(row[0])));
    for (std::size_t s = 0; s < cols.size(); ++s) series[s].y.push_back(num(row[t.column(cols[s])]));
  }
  return io::svg_plot("D(" + std::to_string(cfg.n) + "," + std::to_string(cfg.k) + ",(l," + std::to_string(cfg.n) +
                          "-l)) and bounds",
                      "l", x, series);
}

inline int cmd_figure(const GlobalOptions& g, const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  std::int64_t bad = 0;
  const io::Table t = figure_table(cfg, g.threads, &bad);
  const std::string content = detail::render(g, t);
  const std::string svg = cfg.plot.empty() ? std::string() : figure_svg(cfg, t);
  detail::emit(g, content, out);
  if (!cfg.plot.empty()) io::write_atomic(cfg.plot, svg);
  if (bad > 0) {
    err << "figure: " << bad << " rows with exact_D above an upper bound\n";
    return kViolation;
  }
  return kOk;
}

/// Compositions of n into c parts >= 1, sorted ascending (one per
/// permutation class).
inline std::vector<std::vector<std::int64_t>> sorted_compositions(std::int64_t n, std::int64_t c) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur;
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t left, std::int64_t min_part) {
    if (static_cast<std::int64_t>(cur.size()) == c - 1) {
      if (left >= min_part) {
        cur.push_back(left);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    const std::int64_t slots = c - static_cast<std::int64_t>(cur.size());
    for (std::int64_t v = min_part; v * slots <= left; ++v) {
      cur.push_back(v);
      rec(left - v, v);
      cur.pop_back();
    }
  };
  rec(n, 1);
  return out;
}

inline io::Table bounds_table(std::int64_t k, const std::vector<std::vector<std::int64_t>>& ells, unsigned threads,
                              std::int64_t* violations = nullptr) {
  io::Table t;
  t.columns = {"ell",          "n",           "k",          "exact_D",    "stam_upper", "stam_lower",
               "hm_upper",     "hm_lower",    "thm1_upper", "prop12_upper", "exact_binary", "sigma1",
               "sigma2",       "df_tv",       "thm1_beyond_half_holds"};
  struct Row {
    double d = 0.0;
    BoundReport rep;
    std::optional<bool> extrapolated;
  };
  const auto rows = parallel_map<Row>(ells.size(), threads, [&](std::size_t i) {
    const UrnSpec spec(k, ells[i]);
    return Row{relative_entropy(spec), bound_report(spec), thm1_extrapolation_check(spec.reduced())};
  });
  std::int64_t bad = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const UrnSpec spec(k, ells[i]);
    for (const auto& ub : {r.rep.stam_upper, r.rep.hm_upper, r.rep.thm1_upper, r.rep.prop12_upper})
      if (ub && r.d > *ub + 1e-10) {
        ++bad;
        break;
      }
    for (const auto& lb : {r.rep.stam_lower, r.rep.hm_lower})
      if (lb && r.d < *lb - 1e-10) {
        ++bad;
        break;
      }
    io::Cell extra = r.extrapolated ? io::Cell{*r.extrapolated} : io::Cell{};
    t.add_row({to_string(CountVector(ells[i])), spec.n(), k, r.d, detail::opt(r.rep.stam_upper),
               detail::opt(r.rep.stam_lower), detail::opt(r.rep.hm_upper), detail::opt(r.rep.hm_lower),
               detail::opt(r.rep.thm1_upper), detail::opt(r.rep.prop12_upper), detail::opt(r.rep.exact_binary),
               r.rep.sigma1, r.rep.sigma2, r.rep.df_tv, extra});
  }
  if (violations) *violations = bad;
  return t;
}

struct BoundsOptions {
  std::int64_t k = 0;
  std::string ell;      // comma list; empty means sweep
  std::int64_t n = 0;   // sweep size
  std::int64_t c = 2;   // sweep colours
};

inline int cmd_bounds(const GlobalOptions& g, const BoundsOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<std::vector<std::int64_t>> ells;
  if (!o.ell.empty()) {
    ells.push_back(detail::parse_int_list(o.ell));
  } else {
    urnent::detail::require(o.n >= 1 && o.c >= 1, "bounds: give --ell, or --n and --c to sweep");
    ells = sorted_compositions(o.n, o.c);
    urnent::detail::require(!ells.empty(), "bounds: no compositions of n into c positive parts");
  }
  std::int64_t bad = 0;
  const io::Table t = bounds_table(o.k, ells, g.threads, &bad);
  detail::emit(g, detail::render(g, t), out);
  if (bad > 0) {
    err << "bounds: " << bad << " rows where exact_D falls outside a bound\n";
    return kViolation;
  }
  return kOk;
}

struct DivergenceOptions {
  std::int64_t k = 0;
  std::string ell;
  bool certify = false;
};

inline int cmd_divergence(const GlobalOptions& g, const DivergenceOptions& o, std::ostream& out, std::ostream& err) {
  const UrnSpec spec(o.k, detail::parse_int_list(o.ell));
  const DivergenceReport rep = divergence_report(spec);
  io::Table t;
  t.columns = {"ell", "n", "k", "kl", "tv", "kl_via_u", "support_size", "routes_agree", "pinsker", "bretagnolle_huber",
               "diaconis_freedman"};
  std::vector<io::Cell> row{to_string(CountVector(spec.ell())), spec.n(), spec.k(), rep.kl, rep.tv, rep.kl_via_u,
                            rep.support_size, rep.routes_agree, rep.pinsker, rep.bretagnolle_huber,
                            rep.diaconis_freedman};
  bool ok = rep.consistent();
  if (o.certify) {
    const auto ci = oracle::certified_divergence(spec, g.precision_bits);
    const RealInterval iv = ci.to_real_interval();
    const double dist = ci.distance(rep.kl);
    t.columns.insert(t.columns.end(), {"certified_lo", "certified_hi", "distance_to_certified"});
    row.insert(row.end(), {iv.lo, iv.hi, dist});
    ok = ok && dist <= 1e-12;
  }
  t.add_row(std::move(row));
  detail::emit(g, detail::render(g, t), out);
  if (!ok) {
    err << "divergence: consistency check failed for " << to_string(spec) << "\n";
    return kViolation;
  }
  return kOk;
}

struct DefinettiOptions {
  std::string preset;  // iid-fair-coin | point-mass-balanced | iid:p1,p2,...
  std::string model;   // mixing model file
  std::int64_t c = 2;  // colours for point-mass-balanced
  std::int64_t k_max = 2;
  std::string n_range;  // a:b[:step] or list; defaults to the model's n
};

inline MixingFamily family_from(const DefinettiOptions& o, std::optional<std::int64_t>* model_n) {
  urnent::detail::require(o.preset.empty() != o.model.empty(), "definetti: give exactly one of --preset, --model");
  if (!o.model.empty()) {
    MixingMeasure mu = io::load_mixing_model(o.model);
    *model_n = mu.n();
    return fixed_family(std::move(mu));
  }
  if (o.preset == "iid-fair-coin") return iid_family({0.5, 0.5});
  if (o.preset == "point-mass-balanced") {
    urnent::detail::require(o.c >= 2, "definetti: need --c >= 2");
    return point_mass_balanced_family(static_cast<std::size_t>(o.c));
  }
  if (o.preset.rfind("iid:", 0) == 0) return iid_family(detail::parse_real_list(o.preset.substr(4)));
  throw domain_error("definetti: unknown preset " + o.preset);
}

inline io::Table definetti_table(const ExperimentResult& res) {
  io::Table t;
  t.columns = {"n", "k", "d", "chain_mid", "chain_max", "corollary", "gk_b", "monotone_in_k"};
  for (const auto& r : res.rows)
    t.add_row({r.n, r.k, r.div.d, r.div.chain_mid, r.div.chain_max, r.bounds.corollary, detail::opt(r.bounds.gk_b),
               res.monotone_in_k.at(r.n)});
  return t;
}

inline int cmd_definetti(const GlobalOptions& g, const DefinettiOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<std::int64_t> model_n;
  const MixingFamily family = family_from(o, &model_n);
  std::vector<std::int64_t> ns;
  if (!o.n_range.empty())
    ns = detail::parse_range(o.n_range);
  else if (model_n)
    ns = {*model_n};
  else
    throw domain_error("definetti: --n-range is required with a preset");
  for (auto n : ns) urnent::detail::require(n >= 1, "definetti: n must be positive");
  urnent::detail::require(o.k_max >= 1, "definetti: need --k-max >= 1");
  const ExperimentResult res = monotonicity_experiment(family, o.k_max, ns, g.threads);
  detail::emit(g, detail::render(g, definetti_table(res)), out);
  std::int64_t bad = 0;
  for (const auto& r : res.rows)
    if (r.div.d > r.div.chain_mid + 1e-10 || r.div.chain_mid > r.div.chain_max + 1e-10) ++bad;
  if (bad > 0) {
    err << "definetti: chain inequality fails in " << bad << " rows\n";
    return kViolation;
  }
  return kOk;
}

inline int cmd_verify(const GlobalOptions& g, const std::string& level, std::ostream& out, std::ostream& err,
                      const verify::BoundFunctions& f = {}) {
  urnent::detail::require(level == "fast" || level == "full", "verify: level must be fast or full");
  const auto results = verify::run_all(level == "full" ? verify::Level::full : verify::Level::fast, f, g.threads,
                                       g.precision_bits);
  std::string content;
  if (g.format == Format::json) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : results)
      arr.push_back({{"suite", s.name},
                     {"checks", s.checks},
                     {"violations", s.violations},
                     {"seconds", s.seconds},
                     {"passed", s.passed()},
                     {"first_violation", s.first_violation},
                     {"notes", s.notes}});
    content = arr.dump(2) + "\n";
  } else {
    content = verify::format_report(results);
  }
  detail::emit(g, content, out);
  if (!verify::all_passed(results)) {
    for (const auto& s : results)
      if (!s.passed()) {
        err << "verify: " << s.name << " failed: " << s.first_violation << "\n";
        break;
      }
    return kViolation;
  }
  return kOk;
}

/// Parses argv and dispatches. Errors in arguments or inputs give exit 2.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Sampling with and without replacement: exact relative entropy, bounds, de Finetti experiments"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::string format = "csv";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", g.out, "Output file (written atomically); default standard output");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--precision-bits", g.precision_bits, "Working precision of certified oracle paths")
      ->check(CLI::Range(64, 1 << 20));

  SweepConfig fig;
  auto* figure = app.add_subcommand("figure", "Exact D and all bounds along ell = 1..n/2 (two colours)");
  figure->add_option("--n", fig.n, "Urn size")->capture_default_str();
  figure->add_option("--k", fig.k, "Draws")->capture_default_str();
  figure->add_option("--c", fig.c, "Colours (must be 2)")->capture_default_str();
  figure->add_option("--ell-range", fig.ell_range, "l values, a:b[:step] or comma list (default 1..n/2)");
  figure->add_option("--plot", fig.plot, "Also write an SVG plot here");

  BoundsOptions bo;
  auto* bounds = app.add_subcommand("bounds", "Bound report for one urn, or for every composition of n into c parts");
  bounds->add_option("--k", bo.k, "Draws")->required();
  bounds->add_option("--ell", bo.ell, "Composition, e.g. 40,30,30");
  bounds->add_option("--n", bo.n, "Urn size for a sweep");
  bounds->add_option("--c", bo.c, "Colours for a sweep")->capture_default_str();

  DivergenceOptions dv;
  auto* divergence = app.add_subcommand("divergence", "Exact D and TV for one urn with consistency checks");
  divergence->add_option("--k", dv.k, "Draws")->required();
  divergence->add_option("--ell", dv.ell, "Composition, e.g. 50,50")->required();
  divergence->add_flag("--certify", dv.certify, "Also enclose D with the exact-arithmetic oracle");

  DefinettiOptions df;
  auto* definetti = app.add_subcommand("definetti", "D(P_k || M_k) for a mixing model across k and n");
  definetti->add_option("--preset", df.preset, "iid-fair-coin | point-mass-balanced | iid:p1,p2,...");
  definetti->add_option("--model", df.model, "Mixing model file ('n c' header, then 'ell_1 .. ell_c weight')");
  definetti->add_option("--c", df.c, "Colours for point-mass-balanced")->capture_default_str();
  definetti->add_option("--k-max", df.k_max, "Largest k")->capture_default_str();
  definetti->add_option("--n-range", df.n_range, "a:b[:step] or comma list of n");

  std::string level = "fast";
  auto* verify_cmd = app.add_subcommand("verify", "Run the invariant suites");
  verify_cmd->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}))->capture_default_str();

  for (auto* sub : {figure, bounds, divergence, definetti, verify_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  g.format = format == "json" ? Format::json : Format::csv;

  try {
    if (*figure) return cmd_figure(g, fig, out, err);
    if (*bounds) return cmd_bounds(g, bo, out, err);
    if (*divergence) return cmd_divergence(g, dv, out, err);
    if (*definetti) return cmd_definetti(g, df, out, err);
    return cmd_verify(g, level, out, err);
  } catch (const precision_error& e) {
    err << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace urnent::cli

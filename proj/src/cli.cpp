#include "linhash/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "linhash/ballsbins.hpp"
#include "linhash/bounds.hpp"
#include "linhash/errors.hpp"
#include "linhash/gf2.hpp"
#include "linhash/hashtable.hpp"
#include "linhash/stats.hpp"

#ifndef LINHASH_VERSION
#define LINHASH_VERSION "0.0.0"
#endif

namespace linhash::cli {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

template <typename Int>
  requires std::is_integral_v<Int>
std::string fmt(Int x) {
  return std::to_string(x);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Rows of string cells under a fixed header. CSV prints cells verbatim; JSON
// turns numeric-looking cells into numbers and empty cells into null.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  json summary = json::object();

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
  }
};

json cell_to_json(const std::string& cell) {
  if (cell.empty()) return nullptr;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), i);
      ec == std::errc() && p == cell.data() + cell.size()) {
    return i;
  }
  double d = 0;
  if (auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), d);
      ec == std::errc() && p == cell.data() + cell.size()) {
    return d;
  }
  return cell;
}

struct Manifest {
  std::string subcommand;
  std::vector<std::string> args;
  json flags = json::object();
  std::uint64_t seed = 0;

  json to_json() const {
    json m;
    m["subcommand"] = subcommand;
    m["args"] = args;
    m["flags"] = flags;
    m["seed"] = seed;
    m["rng"] = std::string(kRngAlgorithm);
    m["version"] = LINHASH_VERSION;
    m["timestamp"] = utc_timestamp();
    return m;
  }
};

void write_table(std::ostream& os, const Manifest& manifest, const Table& table,
                 const std::string& format) {
  if (format == "json") {
    json doc;
    doc["manifest"] = manifest.to_json();
    json rows = json::array();
    for (const auto& r : table.rows) {
      json obj = json::object();
      for (std::size_t k = 0; k < r.size(); ++k) obj[table.header[k]] = cell_to_json(r[k]);
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = table.summary;
    os << doc.dump(1) << '\n';
    return;
  }
  os << "# manifest: " << manifest.to_json().dump() << '\n';
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  };
  join(table.header);
  for (const auto& r : table.rows) join(r);
}

// Writes to --out when given, else to `out`.
void emit(std::ostream& out, const std::string& path, const Manifest& manifest, const Table& table,
          const std::string& format) {
  if (path.empty()) {
    write_table(out, manifest, table, format);
    return;
  }
  std::ofstream file(path);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  write_table(file, manifest, table, format);
}

std::vector<std::string> split_header(const char* header) {
  std::vector<std::string> out;
  std::stringstream ss(header);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(env, env + std::strlen(env), v);
    if (ec == std::errc() && *p == '\0') return v;
  }
  return 1;
}

// Arguments worth recording for a replay: everything except the output path.
std::vector<std::string> replayable_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" || args[i] == "-o") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

SetKind set_kind_option(const std::string& name) {
  try {
    return parse_set_kind(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::size_t set_param(SetKind kind, std::size_t b, std::size_t set_size,
                      std::optional<std::size_t> set_dim) {
  if (takes_dimension(kind)) return set_dim.value_or(b);
  if (set_size != 0) return set_size;
  if (b >= 63) throw UsageError("--set-size is required when b >= 63");
  return std::size_t{1} << b;
}

// ----------------------------------------------------------------- simulate

struct SimulateOptions {
  std::size_t u = 16;
  std::vector<std::string> b{"8"};
  std::string set = "interval";
  std::size_t set_size = 0;
  std::optional<std::size_t> set_dim;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::vector<std::size_t> thresholds;
  std::string format = "csv";
  std::string out;
  unsigned jobs = 1;
};

void add_common(CLI::App* sub, std::string& format, std::string& out, std::uint64_t& seed) {
  sub->add_option("--seed", seed, "Master seed")->envname(kSeedEnv)->capture_default_str();
  sub->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out,-o", out, "Output file (default: stdout)");
}

// "10..16" expands to 10, 11, ..., 16.
std::vector<std::size_t> expand_dims(const std::vector<std::string>& specs) {
  std::vector<std::size_t> out;
  auto number = [](std::string_view text) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
      throw UsageError("bad dimension '" + std::string(text) + "'");
    }
    return v;
  };
  for (const std::string& spec : specs) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(spec));
      continue;
    }
    const std::size_t lo = number(std::string_view(spec).substr(0, dots));
    const std::size_t hi = number(std::string_view(spec).substr(dots + 2));
    if (hi < lo) throw UsageError("empty range '" + spec + "'");
    for (std::size_t d = lo; d <= hi; ++d) out.push_back(d);
  }
  return out;
}

int cmd_simulate(const SimulateOptions& o, Manifest manifest, std::ostream& out) {
  const SetKind kind = set_kind_option(o.set);
  const std::vector<std::size_t> dims = expand_dims(o.b);
  manifest.seed = o.seed;
  manifest.flags = {{"u", o.u},           {"b", dims},           {"set", o.set},
                    {"set_size", o.set_size}, {"trials", o.trials}, {"seed", o.seed},
                    {"thresholds", o.thresholds}, {"format", o.format}, {"jobs", o.jobs}};
  if (o.set_dim) manifest.flags["set_dim"] = *o.set_dim;

  Table table;
  table.header = split_header(kExperimentHeader);
  json runs = json::array();
  for (std::size_t b : dims) {
    ExperimentConfig config;
    config.u = o.u;
    config.b = b;
    config.set = {kind, set_param(kind, b, o.set_size, o.set_dim)};
    config.trials = o.trials;
    config.master_seed = o.seed;
    config.thresholds = o.thresholds;
    config.jobs = o.jobs;
    const TrialSummary s = simulate(config);

    const std::string kind_name(to_string(kind));
    auto row = [&](std::string trial, std::string lbin, std::string threshold = "",
                   std::string freq = "", std::string lo = "", std::string hi = "") {
      table.add({"simulate", fmt(o.u), fmt(b), "", kind_name, fmt(s.set_size), std::move(trial),
                 fmt(o.seed), std::move(lbin), std::move(threshold), std::move(freq), std::move(lo),
                 std::move(hi)});
    };
    for (std::size_t i = 0; i < s.lbins.size(); ++i) row(fmt(i), fmt(s.lbins[i]));
    row("mean", fmt(s.mean));
    row("stderr", fmt(s.std_error));
    row("p50", fmt(s.median));
    row("p90", fmt(s.p90));
    row("p99", fmt(s.p99));
    row("max", fmt(s.max));
    json tails = json::array();
    for (const auto& t : s.tails) {
      row("tail", "", fmt(t.threshold), fmt(t.freq), fmt(t.ci_lo), fmt(t.ci_hi));
      tails.push_back({{"threshold", t.threshold},
                       {"hits", t.hits},
                       {"freq", t.freq},
                       {"ci_lo", t.ci_lo},
                       {"ci_hi", t.ci_hi}});
    }
    runs.push_back({{"u", o.u},
                    {"b", b},
                    {"set_kind", kind_name},
                    {"set_size", s.set_size},
                    {"trials", o.trials},
                    {"mean", s.mean},
                    {"std_error", s.std_error},
                    {"median", s.median},
                    {"p90", s.p90},
                    {"p99", s.p99},
                    {"min", s.min},
                    {"max", s.max},
                    {"tails", std::move(tails)}});
  }
  table.summary["runs"] = std::move(runs);
  emit(out, o.out, manifest, table, o.format);
  return kOk;
}

// -------------------------------------------------------------------- exact

struct ExactOptions {
  std::size_t u = 2;
  std::size_t b = 1;
  std::string set = "interval";
  std::size_t set_size = 0;
  std::optional<std::size_t> set_dim;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
};

int cmd_exact(const ExactOptions& o, Manifest manifest, std::ostream& out) {
  const SetKind kind = set_kind_option(o.set);
  manifest.seed = o.seed;
  manifest.flags = {{"u", o.u},       {"b", o.b},       {"set", o.set},
                    {"set_size", o.set_size}, {"seed", o.seed}, {"format", o.format}};
  if (o.set_dim) manifest.flags["set_dim"] = *o.set_dim;
  if (o.u * o.b > kMaxExactBits) {
    throw SizeGuardError("exact enumeration needs u*b <= " + std::to_string(kMaxExactBits));
  }
  std::size_t param = 0;
  if (takes_dimension(kind)) {
    param = o.set_dim.value_or(o.b);
  } else {
    param = o.set_size != 0 ? o.set_size : std::size_t{1} << o.u;
  }
  Rng rng = make_substream(o.seed, kSetStream);
  const BallSet balls = generate_set(kind, o.u, param, rng);
  const ExactLbinDistribution dist = exact_lbin_distribution(o.u, o.b, balls);

  Table table;
  table.header = split_header(kExperimentHeader);
  const std::string kind_name(to_string(kind));
  auto row = [&](std::string trial, std::string lbin, std::string threshold = "",
                 std::string freq = "") {
    table.add({"exact", fmt(o.u), fmt(o.b), "", kind_name, fmt(balls.size()), std::move(trial),
               fmt(o.seed), std::move(lbin), std::move(threshold), std::move(freq), "", ""});
  };
  const Rational expected = dist.expected();
  row("mean", expected.to_string());
  const std::size_t top = dist.maps_by_lbin.rbegin()->first;
  json tails = json::array();
  for (std::size_t ell = 1; ell <= top + 1; ++ell) {
    const Rational p = dist.tail(ell);
    row("tail", "", fmt(ell), p.to_string());
    tails.push_back({{"threshold", ell}, {"probability", p.to_string()}});
  }
  json by_lbin = json::object();
  for (const auto& [lbin, maps] : dist.maps_by_lbin) by_lbin[std::to_string(lbin)] = maps;
  table.summary = {{"u", o.u},
                   {"b", o.b},
                   {"set_kind", kind_name},
                   {"set_size", balls.size()},
                   {"total_maps", dist.total_maps},
                   {"expected_lbin", expected.to_string()},
                   {"expected_lbin_decimal", expected.to_double()},
                   {"maps_by_lbin", std::move(by_lbin)},
                   {"tails", std::move(tails)}};
  emit(out, o.out, manifest, table, o.format);
  return kOk;
}

// ------------------------------------------------------------------- bounds

struct BoundsOptions {
  std::vector<std::string> formulas;
  std::vector<std::size_t> u{8, 10};
  std::vector<std::size_t> t{2, 4};
  std::vector<double> alpha{0.25, 0.5};
  std::vector<std::size_t> b{8, 16};
  std::vector<std::size_t> f;
  std::vector<double> r{4, 16, 256, 65536};
  std::vector<double> eps{0.25, 0.5, 0.8};
  std::string format = "csv";
  std::string out;
};

const std::vector<std::string> kFormulas = {"c-epsilon",     "surjective-miss", "e2",
                                            "tail",          "ell-threshold",   "tail-params"};

int cmd_bounds(const BoundsOptions& o, Manifest manifest, std::ostream& out) {
  const std::vector<std::string> formulas = o.formulas.empty() ? kFormulas : o.formulas;
  manifest.flags = {{"formula", formulas}, {"u", o.u},     {"t", o.t},
                    {"alpha", o.alpha},    {"b", o.b},     {"f", o.f},
                    {"r", o.r},            {"eps", o.eps}, {"format", o.format}};
  Table table;
  table.header = {"formula", "u",   "t",     "b",       "f",   "alpha",     "r",
                  "eps",     "raw", "clamped", "vacuous", "ell", "threshold"};
  auto f_values = [&](std::size_t b) {
    if (!o.f.empty()) return o.f;
    std::vector<std::size_t> fs;
    for (std::size_t g = 1; g <= 8; ++g) fs.push_back(b + g);
    return fs;
  };
  auto guarded = [](auto&& fn) {
    try {
      fn();
    } catch (const std::domain_error&) {
      // Combination outside the formula's domain: no row.
    }
  };
  auto bound_cells = [](const bounds::BoundValue& v) {
    return std::vector<std::string>{fmt(v.raw), fmt(v.clamped), v.vacuous() ? "1" : "0"};
  };
  for (const auto& name : formulas) {
    if (name == "c-epsilon") {
      for (double e : o.eps) {
        guarded([&] {
          table.add({name, "", "", "", "", "", "", fmt(e), fmt(bounds::c_epsilon(e)), "", "", "", ""});
        });
      }
    } else if (name == "surjective-miss") {
      for (std::size_t u : o.u) {
        for (std::size_t t : o.t) {
          for (double a : o.alpha) {
            guarded([&] {
              auto c = bound_cells(bounds::bound_surjective_miss(u, t, a));
              table.add({name, fmt(u), fmt(t), "", "", fmt(a), "", "", c[0], c[1], c[2], "", ""});
            });
          }
        }
      }
    } else if (name == "e2") {
      for (std::size_t b : o.b) {
        for (std::size_t f : f_values(b)) {
          guarded([&] {
            auto c = bound_cells(bounds::bound_e2(b, f));
            table.add({name, "", "", fmt(b), fmt(f), "", "", "", c[0], c[1], c[2], "", ""});
          });
        }
      }
    } else if (name == "tail") {
      for (std::size_t b : o.b) {
        for (double r : o.r) {
          for (double e : o.eps) {
            guarded([&] {
              auto c = bound_cells(bounds::bound_tail(b, r, e));
              table.add({name, "", "", fmt(b), "", "", fmt(r), fmt(e), c[0], c[1], c[2], "", ""});
            });
          }
        }
      }
    } else if (name == "ell-threshold") {
      for (std::size_t b : o.b) {
        for (std::size_t f : f_values(b)) {
          for (double e : o.eps) {
            guarded([&] {
              table.add({name, "", "", fmt(b), fmt(f), "", "", fmt(e), "", "", "", "",
                         fmt(bounds::ell_threshold(e, f, b))});
            });
          }
        }
      }
    } else if (name == "tail-params") {
      for (std::size_t b : o.b) {
        for (double r : o.r) {
          for (double e : o.eps) {
            guarded([&] {
              const auto p = bounds::tail_parameters(b, r, e);
              table.add({name, "", "", fmt(b), fmt(p.f), "", fmt(r), fmt(e), "", "", "", fmt(p.ell),
                         fmt(p.threshold)});
            });
          }
        }
      }
    } else {
      throw UsageError("unknown formula '" + name + "'");
    }
  }
  if (table.rows.empty()) throw UsageError("no parameter combination lies in any formula's domain");
  table.summary["rows"] = table.rows.size();
  emit(out, o.out, manifest, table, o.format);
  return kOk;
}

// ------------------------------------------------------------------- verify

struct VerifyOptions {
  std::vector<std::string> checks;
  std::size_t u = 4;
  std::size_t f = 3;
  std::size_t b = 2;
  std::size_t samples = 100000;
  std::size_t instances = 10000;
  std::size_t subspace_instances = 1000;
  std::uint64_t seed = 1;
  bool inject_fault = false;
  std::string format = "csv";
  std::string out;
};

struct CheckResult {
  bool pass;
  std::string detail;
};

const std::vector<std::string> kChecks = {"composition-uniformity", "factorization-count",
                                          "e2-equivalence",         "e1-e2-implication",
                                          "pairwise-independence",  "subspace-structure"};

CheckResult check_composition(const VerifyOptions& o) {
  if (o.u * o.b > 12) throw SizeGuardError("composition-uniformity needs u*b <= 12");
  if (o.f < o.b) throw UsageError("composition-uniformity needs f >= b");
  Rng rng = make_substream(o.seed, 1);
  const LinearMap t1 = sample_surjective(o.f, o.b, rng);
  std::vector<std::uint64_t> observed(std::size_t{1} << (o.u * o.b), 0);
  std::vector<GF2Vector> probes;
  if (o.u <= 6) {
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << o.u); ++x) {
      probes.push_back(GF2Vector::from_uint(o.u, x));
    }
  } else {
    for (std::size_t i = 0; i < o.u; ++i) probes.push_back(GF2Vector::unit(o.u, i));
  }
  std::size_t mismatches = 0;
  for (std::size_t s = 0; s < o.samples; ++s) {
    const LinearMap t0 = sample_uniform_linear(o.u, o.f, rng);
    LinearMap composite = compose(t1, t0);
    if (o.inject_fault) composite = composite.with_bit_flipped(0, 0);
    for (const auto& x : probes) {
      if (apply(composite, x) != apply(t1, apply(t0, x))) {
        ++mismatches;
        break;
      }
    }
    ++observed[composite.index()];
  }
  const double stat = stats::chi_square_uniform(observed);
  const double critical = stats::chi_square_critical(observed.size() - 1, 0.001);
  std::ostringstream d;
  d << "u=" << o.u << " f=" << o.f << " b=" << o.b << " samples=" << o.samples
    << " cells=" << observed.size() << " chi2=" << fmt(stat) << " critical=" << fmt(critical)
    << " pointwise_mismatches=" << mismatches;
  return {mismatches == 0 && stat <= critical, d.str()};
}

CheckResult check_factorization(const VerifyOptions& o) {
  if (o.f < o.b || o.u < o.f) throw UsageError("factorization-count needs u >= f >= b");
  if (o.u * o.f > 22) throw SizeGuardError("factorization-count needs u*f <= 22");
  Rng rng = make_substream(o.seed, 2);
  const double work = std::ldexp(1.0, static_cast<int>(o.u * o.b + o.f * o.b + o.u * o.f));
  const bool exhaustive = o.u * o.b + o.f * o.b <= 40 && work <= std::ldexp(1.0, 30);

  std::vector<std::pair<LinearMap, LinearMap>> pairs;
  if (exhaustive) {
    std::vector<LinearMap> outers;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << (o.f * o.b)); ++i) {
      LinearMap t1 = LinearMap::from_index(o.f, o.b, i);
      if (is_surjective(t1)) outers.push_back(std::move(t1));
    }
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << (o.u * o.b)); ++i) {
      const LinearMap t = LinearMap::from_index(o.u, o.b, i);
      for (const auto& t1 : outers) pairs.emplace_back(t, t1);
    }
  } else {
    for (int k = 0; k < 64; ++k) {
      pairs.emplace_back(sample_uniform_linear(o.u, o.b, rng), sample_surjective(o.f, o.b, rng));
    }
  }
  // The brute-force count is checked against the coset size 2^((f-b)u). The
  // kernel-restriction construction is checked to be an injection into the
  // factor set, reaching 2^((f-b) dim Ker T) of its members.
  const std::size_t gap = o.f - o.b;
  std::size_t mismatches = 0;
  std::size_t kernel_formula_mismatches = 0;
  std::size_t bad_constructions = 0;
  std::size_t bad_samples = 0;
  std::map<std::size_t, std::array<std::uint64_t, 3>> by_kernel_dim;
  for (const auto& [t, t1] : pairs) {
    const std::size_t kdim = o.u - rank(t);
    const std::uint64_t predicted = std::uint64_t{1} << (gap * o.u);
    const std::uint64_t kernel_predicted = std::uint64_t{1} << (gap * kdim);
    const std::uint64_t count = count_factorizations(t, t1);
    if (count != predicted) ++mismatches;
    if (count != kernel_predicted) ++kernel_formula_mismatches;

    std::uint64_t constructed = 0;
    if (gap * kdim <= 12) {
      const SubspaceBasis ker_t1 = kernel_basis(t1);
      std::set<std::uint64_t> distinct;
      for (std::uint64_t idx = 0; idx < kernel_predicted; ++idx) {
        std::vector<GF2Vector> images(kdim, GF2Vector(o.f));
        for (std::size_t i = 0; i < kdim; ++i) {
          for (std::size_t j = 0; j < gap; ++j) {
            if ((idx >> (i * gap + j)) & 1U) images[i] ^= ker_t1.basis()[j];
          }
        }
        const LinearMap t0 = factor_from_kernel_map(t, t1, images);
        if (compose(t1, t0) != t) ++bad_constructions;
        distinct.insert(t0.index());
      }
      constructed = distinct.size();
      if (constructed != kernel_predicted) ++bad_constructions;
    }
    by_kernel_dim[kdim] = {count, predicted, constructed};
    if (compose(t1, sample_factor_t0(t, t1, rng)) != t) ++bad_samples;
  }
  std::ostringstream d;
  d << "u=" << o.u << " f=" << o.f << " b=" << o.b << (exhaustive ? " exhaustive" : " sampled")
    << " pairs=" << pairs.size() << " mismatches=" << mismatches
    << " kernel_formula_mismatches=" << kernel_formula_mismatches
    << " bad_constructions=" << bad_constructions << " bad_factor_samples=" << bad_samples;
  for (const auto& [kdim, c] : by_kernel_dim) {
    d << " [dimKer=" << kdim << " count=" << c[0] << " predicted=" << c[1]
      << " kernel_constructed=" << c[2] << "]";
  }
  return {mismatches == 0 && bad_constructions == 0 && bad_samples == 0, d.str()};
}

CheckResult check_e2_equivalence(const VerifyOptions& o) {
  Rng rng = make_substream(o.seed, 3);
  std::size_t disagreements = 0;
  std::size_t occurred = 0;
  for (std::size_t i = 0; i < o.instances; ++i) {
    const SmallInstance inst = sample_small_instance(rng, o.u, o.f, o.b);
    const bool via_complement = event_e2(inst.balls, inst.t0, inst.t1);
    const bool via_fibers = event_e2_direct(inst.balls, inst.t0, inst.t1);
    if (via_complement != via_fibers) ++disagreements;
    if (via_complement) ++occurred;
  }
  std::ostringstream d;
  d << "instances=" << o.instances << " e2_true=" << occurred << " disagreements=" << disagreements;
  return {disagreements == 0, d.str()};
}

CheckResult check_implication(const VerifyOptions& o) {
  Rng rng = make_substream(o.seed, 4);
  std::size_t violations = 0;
  std::size_t covered = 0;
  std::size_t e1_count = 0;
  for (std::size_t i = 0; i < o.instances; ++i) {
    const SmallInstance inst = sample_small_instance(rng, o.u, o.f, o.b);
    const std::size_t ell = 1 + uniform_below(rng, inst.balls.size());
    const ImplicationReport r = check_e1_e2_implication(inst.balls, inst.t0, inst.t1, ell);
    violations += r.violations;
    if (r.e1) ++e1_count;
    for (const auto& w : r.witnesses) covered += w.fiber_covered ? 1 : 0;
  }
  std::ostringstream d;
  d << "instances=" << o.instances << " e1_true=" << e1_count << " covered_witnesses=" << covered
    << " violations=" << violations;
  return {violations == 0, d.str()};
}

CheckResult check_pairwise(const VerifyOptions& o) {
  Rng rng = make_substream(o.seed, 5);
  const PairwiseReport r = pairwise_independence_check(o.u, o.b, rng);
  std::ostringstream d;
  d << "u=" << o.u << " b=" << o.b << (r.exact ? " exact" : " sampled")
    << " maps=" << r.maps_examined << " pairs=" << r.pairs_checked << " cells=" << r.cells_checked
    << " failures=" << r.failures;
  return {r.holds(), d.str()};
}

CheckResult check_subspace(const VerifyOptions& o) {
  Rng rng = make_substream(o.seed, 6);
  const std::size_t dim = std::min(o.b, o.u);
  std::size_t exceptions = 0;
  double zero_bin_sum = 0;
  for (std::size_t i = 0; i < o.subspace_instances; ++i) {
    const BallSet s = generate_set(SetKind::kSubspace, o.u, dim, rng);
    const LinearMap t = sample_uniform_linear(o.u, o.b, rng);
    const SubspaceStructureReport r = subspace_structure(t, s);
    if (!r.holds()) ++exceptions;
    zero_bin_sum += static_cast<double>(r.anchor_bin_size);
  }
  std::ostringstream d;
  d << "u=" << o.u << " dim=" << dim << " b=" << o.b << " instances=" << o.subspace_instances
    << " exceptions=" << exceptions << " mean_zero_bin="
    << fmt(zero_bin_sum / static_cast<double>(std::max<std::size_t>(1, o.subspace_instances)));
  return {exceptions == 0, d.str()};
}

int cmd_verify(const VerifyOptions& o, Manifest manifest, std::ostream& out) {
  const std::vector<std::string> checks = o.checks.empty() ? kChecks : o.checks;
  manifest.seed = o.seed;
  manifest.flags = {{"check", checks},
                    {"u", o.u},
                    {"f", o.f},
                    {"b", o.b},
                    {"samples", o.samples},
                    {"instances", o.instances},
                    {"subspace_instances", o.subspace_instances},
                    {"seed", o.seed},
                    {"inject_fault", o.inject_fault},
                    {"format", o.format}};
  const std::map<std::string, std::function<CheckResult(const VerifyOptions&)>> registry = {
      {"composition-uniformity", check_composition}, {"factorization-count", check_factorization},
      {"e2-equivalence", check_e2_equivalence},      {"e1-e2-implication", check_implication},
      {"pairwise-independence", check_pairwise},     {"subspace-structure", check_subspace}};

  Table table;
  table.header = {"check", "status", "detail"};
  bool all_pass = true;
  for (const auto& name : checks) {
    auto it = registry.find(name);
    if (it == registry.end()) throw UsageError("unknown check '" + name + "'");
    const CheckResult r = it->second(o);
    all_pass = all_pass && r.pass;
    table.add({name, r.pass ? "PASS" : "FAIL", r.detail});
  }
  table.summary = {{"all_pass", all_pass}, {"checks", checks.size()}};
  emit(out, o.out, manifest, table, o.format);
  return all_pass ? kOk : kVerificationFailed;
}

// -------------------------------------------------------------- table-bench

struct TableBenchOptions {
  std::vector<std::string> workloads{"random"};
  std::vector<std::size_t> n{65536};
  std::size_t u = 32;
  std::size_t b = 0;
  bool linear = false;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
};

int cmd_table_bench(const TableBenchOptions& o, Manifest manifest, std::ostream& out) {
  manifest.seed = o.seed;
  manifest.flags = {{"workload", o.workloads}, {"n", o.n},         {"u", o.u},
                    {"b", o.b},                {"linear", o.linear}, {"seed", o.seed},
                    {"format", o.format}};
  Table table;
  table.header = {"workload",        "n",        "u",       "initial_b",        "b",
                  "max_chain",       "largest_bin", "mean_probes_hit", "mean_probes_miss",
                  "measured_probes", "resizes",  "audit",   "predicted_chain"};
  bool consistent = true;
  std::uint64_t stream = 0;
  for (const auto& workload : o.workloads) {
    const SetKind kind = set_kind_option(workload);
    if (kind != SetKind::kRandom && kind != SetKind::kInterval && kind != SetKind::kSubspace) {
      throw UsageError("table-bench workloads are random, interval and subspace");
    }
    for (std::size_t n : o.n) {
      ++stream;
      std::size_t initial_b = o.b;
      if (initial_b == 0) {
        initial_b = n <= 2 ? 1 : static_cast<std::size_t>(std::bit_width(n - 1));
      }
      LinearHashTable<std::uint64_t> table_under_test(o.u, initial_b, splitmix64(o.seed + stream),
                                                      !o.linear);
      std::optional<BallSet> keys;
      if (n > 0) {
        Rng rng = make_substream(o.seed, stream);
        std::size_t param = n;
        if (kind == SetKind::kSubspace) {
          if (!std::has_single_bit(n)) throw UsageError("subspace workload needs n a power of two");
          param = static_cast<std::size_t>(std::countr_zero(n));
        }
        keys = generate_set(kind, o.u, param, rng);
        std::uint64_t v = 0;
        for (const auto& k : keys->members()) table_under_test.insert(k, v++);
        for (const auto& k : keys->members()) table_under_test.get(k);
      }
      const HashTableStats s = table_under_test.stats();
      const std::size_t lbin = keys ? largest_bin(table_under_test.hash(), *keys) : 0;
      // Subspace keys under a linear hash: every chain is a coset of
      // span(keys) ∩ Ker(hash), so the longest one is predicted exactly.
      std::string predicted;
      bool structure_ok = true;
      if (keys && kind == SetKind::kSubspace && o.linear) {
        const std::size_t p = subspace_structure(table_under_test.hash(), *keys).predicted_bin_size;
        predicted = fmt(p);
        structure_ok = p == s.max_chain;
      }
      const bool audit = table_under_test.audit() && lbin == s.max_chain && structure_ok;
      consistent = consistent && audit;
      const double measured =
          s.lookups == 0 ? 0.0 : static_cast<double>(s.probes) / static_cast<double>(s.lookups);
      table.add({workload, fmt(n), fmt(o.u), fmt(initial_b), fmt(s.bucket_bits), fmt(s.max_chain),
                 fmt(lbin), fmt(s.mean_probes_hit), fmt(s.mean_probes_miss), fmt(measured),
                 fmt(s.resizes), audit ? "ok" : "FAIL", predicted});
    }
  }
  table.summary = {{"rows", table.rows.size()}, {"consistent", consistent}};
  emit(out, o.out, manifest, table, o.format);
  return consistent ? kOk : kVerificationFailed;
}

// ------------------------------------------------------------------- replay

json read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::string first;
  std::getline(in, first);
  const std::string prefix = "# manifest: ";
  if (first.rfind(prefix, 0) == 0) return json::parse(first.substr(prefix.size()));
  std::stringstream rest;
  rest << first << '\n' << in.rdbuf();
  const json doc = json::parse(rest.str(), nullptr, false);
  if (doc.is_discarded() || !doc.contains("manifest")) {
    throw UsageError("'" + path + "' carries no manifest");
  }
  return doc["manifest"];
}

}  // namespace

std::vector<std::string> data_rows(const std::string& output) {
  std::vector<std::string> rows;
  if (!output.empty() && output.front() == '{') {
    const json doc = json::parse(output);
    for (const auto& r : doc.at("rows")) rows.push_back(r.dump());
    rows.push_back(doc.at("summary").dump());
    return rows;
  }
  std::stringstream ss(output);
  for (std::string line; std::getline(ss, line);) {
    if (line.rfind("#", 0) != 0) rows.push_back(line);
  }
  return rows;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear GF(2) hashing: balls-and-bins experiments, bounds and checks", "linhash"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags (flags win)");
  app.set_version_flag("--version", LINHASH_VERSION);

  const std::uint64_t seed = default_seed();

  SimulateOptions sim;
  sim.seed = seed;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of lbin for random maps");
  simulate_cmd->add_option("--u", sim.u, "Universe dimension")->capture_default_str();
  simulate_cmd->add_option("--b", sim.b, "Bin dimension(s) or ranges like 10..16")
      ->delimiter(',')
      ->capture_default_str();
  simulate_cmd->add_option("--set", sim.set, "interval|random|subspace|affine|cluster")
      ->capture_default_str();
  simulate_cmd->add_option("--set-size", sim.set_size, "Ball count (default 2^b)");
  simulate_cmd->add_option("--set-dim", sim.set_dim, "Subspace dimension (default b)");
  simulate_cmd->add_option("--trials", sim.trials, "Trials per b")->capture_default_str();
  simulate_cmd->add_option("--thresholds", sim.thresholds, "Tail thresholds ell")->delimiter(',');
  simulate_cmd->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str();
  add_common(simulate_cmd, sim.format, sim.out, sim.seed);

  ExactOptions ex;
  ex.seed = seed;
  auto* exact_cmd = app.add_subcommand("exact", "Exact E[lbin] and tails by enumerating all maps");
  exact_cmd->add_option("--u", ex.u, "Universe dimension")->capture_default_str();
  exact_cmd->add_option("--b", ex.b, "Bin dimension")->capture_default_str();
  exact_cmd->add_option("--set", ex.set, "interval|random|subspace|affine|cluster")
      ->capture_default_str();
  exact_cmd->add_option("--set-size", ex.set_size, "Ball count (default 2^u)");
  exact_cmd->add_option("--set-dim", ex.set_dim, "Subspace dimension (default b)");
  add_common(exact_cmd, ex.format, ex.out, ex.seed);

  BoundsOptions bo;
  std::uint64_t unused_seed = seed;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the closed-form tail bounds on a grid");
  bounds_cmd->add_option("--formula", bo.formulas, "c-epsilon|surjective-miss|e2|tail|ell-threshold|tail-params")
      ->delimiter(',');
  bounds_cmd->add_option("--u", bo.u)->delimiter(',')->capture_default_str();
  bounds_cmd->add_option("--t", bo.t)->delimiter(',')->capture_default_str();
  bounds_cmd->add_option("--alpha", bo.alpha)->delimiter(',')->capture_default_str();
  bounds_cmd->add_option("--b", bo.b)->delimiter(',')->capture_default_str();
  bounds_cmd->add_option("--f", bo.f, "Intermediate dims (default b+1..b+8)")->delimiter(',');
  bounds_cmd->add_option("--r", bo.r)->delimiter(',')->capture_default_str();
  bounds_cmd->add_option("--eps", bo.eps)->delimiter(',')->capture_default_str();
  add_common(bounds_cmd, bo.format, bo.out, unused_seed);

  VerifyOptions vo;
  vo.seed = seed;
  auto* verify_cmd = app.add_subcommand("verify", "Exhaustive and randomized small-dimension checks");
  verify_cmd->add_option("--check", vo.checks, "Checks to run (default: all)")->delimiter(',');
  verify_cmd->add_option("--u", vo.u)->capture_default_str();
  verify_cmd->add_option("--f", vo.f)->capture_default_str();
  verify_cmd->add_option("--b", vo.b)->capture_default_str();
  verify_cmd->add_option("--samples", vo.samples, "Composition samples")->capture_default_str();
  verify_cmd->add_option("--instances", vo.instances, "Random E2 / implication instances")
      ->capture_default_str();
  verify_cmd->add_option("--subspace-instances", vo.subspace_instances)->capture_default_str();
  verify_cmd->add_flag("--inject-fault", vo.inject_fault,
                       "Flip one bit of every computed composition (negative control)");
  add_common(verify_cmd, vo.format, vo.out, vo.seed);

  TableBenchOptions tb;
  tb.seed = seed;
  auto* bench_cmd = app.add_subcommand("table-bench", "Drive the linear-hash table and report chains");
  bench_cmd->add_option("--workload", tb.workloads, "random|interval|subspace")->delimiter(',');
  bench_cmd->add_option("--n", tb.n, "Key counts")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--u", tb.u, "Key dimension")->capture_default_str();
  bench_cmd->add_option("--b", tb.b, "Initial bucket bits (default ceil(log2 n))");
  bench_cmd->add_flag("--linear", tb.linear, "Use a linear map (zero translation)");
  add_common(bench_cmd, tb.format, tb.out, tb.seed);

  std::string replay_path;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in an output's manifest");
  replay_cmd->add_option("manifest", replay_path, "CSV or JSON output file")->required();
  replay_cmd->add_option("--out,-o", replay_out, "Output file (default: stdout)");

  std::vector<const char*> argv{"linhash"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }
    Manifest manifest;
    manifest.args = replayable_args(args);
    if (*simulate_cmd) {
      manifest.subcommand = "simulate";
      return cmd_simulate(sim, manifest, out);
    }
    if (*exact_cmd) {
      manifest.subcommand = "exact";
      return cmd_exact(ex, manifest, out);
    }
    if (*bounds_cmd) {
      manifest.subcommand = "bounds";
      return cmd_bounds(bo, manifest, out);
    }
    if (*verify_cmd) {
      manifest.subcommand = "verify";
      return cmd_verify(vo, manifest, out);
    }
    if (*bench_cmd) {
      manifest.subcommand = "table-bench";
      return cmd_table_bench(tb, manifest, out);
    }
    if (*replay_cmd) {
      const json m = read_manifest(replay_path);
      std::vector<std::string> replay_args = m.at("args").get<std::vector<std::string>>();
      if (!replay_args.empty() && replay_args.front() == "replay") {
        throw UsageError("refusing to replay a replay manifest");
      }
      if (!replay_out.empty()) {
        replay_args.push_back("--out");
        replay_args.push_back(replay_out);
      }
      return run(replay_args, out, err);
    }
  } catch (const SizeGuardError& e) {
    err << "linhash: size guard: " << e.what() << '\n';
    return kSizeGuard;
  } catch (const std::exception& e) {
    err << "linhash: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace linhash::cli

#pragma once

// Batch driver behind the `tracelab` executable. Configuration is a flat
// `key = value` file, optionally overridden by flags; every command writes its
// tables into the output directory and returns a process exit code:
//   0 all checks passed, 1 some check failed (outputs still written),
//   2 configuration or input error.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tracelab/csv.hpp"
#include "tracelab/fem.hpp"
#include "tracelab/identity_suite.hpp"
#include "tracelab/inequality_lab.hpp"

namespace tracelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct Dims {
  Index dom = 0;
  Index cod = 0;
  bool operator==(const Dims&) const = default;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::vector<Dims> dims{{8, 6}};
  int trials = 10;
  std::string domain = "square";
  int refine = 1;
  std::vector<double> s_values;  // empty: the command's default grid
  std::string output_path;       // empty: $TRACELAB_OUT_DIR, else "."
  std::string mode = "both";

  bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"verify-identities", "fem-check", "constants", "report"};
  return names;
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"command", "seed",     "dims",        "trials", "domain",
                                             "refine",  "s_values", "output_path", "mode"};
  return keys;
}

inline std::vector<double> default_identity_orders() { return {-1.0, 0.25, 0.5, 0.75, 1.0, 2.0}; }

// ---------------------------------------------------------------- parsing

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw Error(Errc::config_error, where + ": " + what);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& where, const char* what) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && text[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last)
    config_fail(where, std::string("expected ") + what + ", got '" + text + "'");
  return value;
}

inline Dims parse_dims_item(const std::string& text, const std::string& where) {
  const auto x = text.find('x');
  if (x == std::string::npos) config_fail(where, "dims entry '" + text + "' is not AxB");
  const auto a = parse_number<long>(text.substr(0, x), where, "an integer dimension");
  const auto b = parse_number<long>(text.substr(x + 1), where, "an integer dimension");
  if (a < 1 || b < 1) config_fail(where, "dims entry '" + text + "' must be positive");
  return {static_cast<Index>(a), static_cast<Index>(b)};
}

}  // namespace detail

/// Applies one `key = value` setting; `where` names the line or flag for errors.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& raw,
                          const std::string& where) {
  const std::string value = detail::trim(raw);
  if (key == "command") {
    c.command = value;
  } else if (key == "seed") {
    c.seed = detail::parse_number<std::uint64_t>(value, where, "a non-negative integer seed");
  } else if (key == "dims") {
    c.dims.clear();
    for (const std::string& item : detail::split(value, ',')) c.dims.push_back(detail::parse_dims_item(item, where));
    if (c.dims.empty()) detail::config_fail(where, "dims list is empty");
  } else if (key == "trials") {
    c.trials = detail::parse_number<int>(value, where, "an integer trial count");
  } else if (key == "domain") {
    c.domain = value;
  } else if (key == "refine") {
    c.refine = detail::parse_number<int>(value, where, "an integer refinement level");
  } else if (key == "s_values") {
    c.s_values.clear();
    if (!value.empty())
      for (const std::string& item : detail::split(value, ','))
        c.s_values.push_back(detail::parse_number<double>(item, where, "a real order"));
  } else if (key == "output_path") {
    c.output_path = value;
  } else if (key == "mode") {
    c.mode = value;
  } else {
    detail::config_fail(where, "unknown key '" + key + "'");
  }
}

/// Cross-field rules; throws ConfigError.
inline void validate(const RunConfig& c) {
  const auto& names = commands();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    detail::config_fail("command", c.command.empty() ? "no command given" : "unknown command '" + c.command + "'");
  if (c.trials < 1) detail::config_fail("trials", "must be at least 1");
  if (c.refine < 0) detail::config_fail("refine", "must be non-negative");
  if (c.mode != "graph" && c.mode != "surrogate" && c.mode != "both")
    detail::config_fail("mode", "must be graph, surrogate or both");
  try {
    (void)fem::parse_domain(c.domain, c.refine);
  } catch (const Error& e) {
    detail::config_fail("domain", e.what());
  }
  for (double s : c.s_values) {
    if (!std::isfinite(s)) detail::config_fail("s_values", "orders must be finite");
    if (c.command == "constants" && (s < 0.0 || s > 1.0))
      detail::config_fail("s_values", "order " + format_double(s) + " outside [0, 1]");
  }
}

/// Command-line spelling of a config key.
inline std::string flag_for(const std::string& key) {
  if (key == "s_values") return "--s";
  if (key == "output_path") return "--out";
  return "--" + key;
}

/// Parses config text, then applies `overrides` (flag name, value) on top.
/// Blank lines and `#` comments are ignored; each key may appear once.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) detail::config_fail(where, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    if (!seen.insert(key).second) detail::config_fail(where, "duplicate key '" + key + "'");
    apply_setting(c, key, line.substr(eq + 1), where);
  }
  for (const auto& [key, value] : overrides) apply_setting(c, key, value, flag_for(key));
  validate(c);
  return c;
}

/// Inverse of parse_config: parsing the result yields an equal RunConfig.
inline std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os << "command = " << c.command << '\n';
  os << "seed = " << c.seed << '\n';
  os << "dims = ";
  for (std::size_t i = 0; i < c.dims.size(); ++i) os << (i ? "," : "") << c.dims[i].dom << 'x' << c.dims[i].cod;
  os << '\n';
  os << "trials = " << c.trials << '\n';
  os << "domain = " << c.domain << '\n';
  os << "refine = " << c.refine << '\n';
  os << "s_values = ";
  for (std::size_t i = 0; i < c.s_values.size(); ++i) os << (i ? "," : "") << format_double(c.s_values[i]);
  os << '\n';
  os << "output_path = " << c.output_path << '\n';
  os << "mode = " << c.mode << '\n';
  return os.str();
}

// ---------------------------------------------------------------- tables

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double table_number(const std::string& text, const char* table) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(Errc::io_error, std::string(table) + ": bad number '" + text + "'");
  return value;
}

inline const char* status(const ResidualReport& r) {
  if (r.skipped) return "skipped";
  return r.pass ? "true" : "false";
}

}  // namespace detail

inline constexpr const char* kIdentitiesHeader = "name,context,residual,tolerance,pass";
inline constexpr const char* kConstantsHeader = "theorem,mesh,refine,dofs,s,c_low,c_high,worst_violation,mode";

inline std::string identities_csv(const std::vector<ResidualReport>& rows) {
  std::ostringstream os;
  os << kIdentitiesHeader << '\n';
  for (const auto& r : rows)
    os << detail::csv_field(r.name) << ',' << detail::csv_field(r.context) << ',' << format_double(r.residual)
       << ',' << format_double(r.tolerance) << ',' << detail::status(r) << '\n';
  return os.str();
}

inline std::string constants_csv(const std::vector<lab::ConstantsRow>& rows) {
  std::ostringstream os;
  os << kConstantsHeader << '\n';
  for (const auto& r : rows)
    os << detail::csv_field(r.theorem) << ',' << detail::csv_field(r.mesh) << ',' << r.refine << ',' << r.dofs
       << ',' << format_double(r.s) << ',' << format_double(r.c_low) << ',' << format_double(r.c_high) << ','
       << format_double(r.worst_violation) << ',' << r.mode << '\n';
  return os.str();
}

// ---------------------------------------------------------------- running

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;
  std::string summary;  // body of summary.txt without the timestamp header
};

inline std::filesystem::path resolve_output_dir(const RunConfig& c) {
  if (!c.output_path.empty()) return c.output_path;
  if (const char* env = std::getenv("TRACELAB_OUT_DIR"); env && *env) return env;
  return ".";
}

namespace detail {

inline void write_file(RunOutcome& out, const std::string& name, const std::string& body) {
  const std::filesystem::path path = out.output_dir / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::io_error, "cannot write " + path.string());
  os << body;
  if (!os) throw Error(Errc::io_error, "failed writing " + path.string());
  out.files.push_back(path);
}

inline std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_summary(RunOutcome& out, const std::string& command) {
  write_file(out, "summary.txt", "# tracelab " + command + " generated " + timestamp_utc() + "\n" + out.summary);
}

inline std::vector<lab::NormMode> modes_of(const RunConfig& c) {
  if (c.mode == "graph") return {lab::NormMode::graph};
  if (c.mode == "surrogate") return {lab::NormMode::surrogate};
  return {lab::NormMode::graph, lab::NormMode::surrogate};
}

inline std::string fixed12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}

/// Worst report of a permutation sweep, labelled with its order.
inline ResidualReport worst_of(const std::vector<ResidualReport>& reports) {
  ResidualReport worst = reports.front();
  bool all_pass = true;
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    if (r.residual > worst.residual) worst = r;
  }
  worst.pass = all_pass;
  return worst;
}

inline std::size_t count_failed(const std::vector<ResidualReport>& rows) {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ResidualReport& r) { return !r.skipped && !r.pass; }));
}

inline std::string identity_summary(const std::vector<ResidualReport>& rows) {
  std::map<std::string, double> worst;
  std::size_t skipped = 0;
  for (const auto& r : rows) {
    if (r.skipped) {
      ++skipped;
      continue;
    }
    worst[r.name] = std::max(worst[r.name], r.residual);
  }
  std::ostringstream os;
  os << "rows=" << rows.size() << " failed=" << count_failed(rows) << " skipped=" << skipped << '\n';
  for (const auto& [name, value] : worst) os << "max_residual(" << name << ")=" << format_double(value) << '\n';
  return os.str();
}

}  // namespace detail

inline RunOutcome run_verify_identities(const RunConfig& c, RunOutcome out) {
  const std::vector<double> orders = c.s_values.empty() ? default_identity_orders() : c.s_values;
  Rng ranks(c.seed);
  std::vector<ResidualReport> rows;
  for (int t = 0; t < c.trials; ++t) {
    const Dims dims = c.dims[static_cast<std::size_t>(t) % c.dims.size()];
    const Index rank = ranks.integer(1, static_cast<int>(std::min(dims.dom, dims.cod)));
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(t);
    const auto [a, b] = random_operator(seed, dims.dom, dims.cod, rank);
    const std::string context = tracelab::detail::dims_context(seed, dims.dom, dims.cod, rank);
    for (auto& r : check_resolvent_identities(a, b, context)) rows.push_back(std::move(r));
    rows.push_back(check_tb_pinv(a, b, context));
    rows.push_back(check_decomposition(a, b, context));
    rows.push_back(detail::worst_of(check_permutation(a, b, orders, context)));
  }
  detail::write_file(out, "identities.csv", identities_csv(rows));
  out.summary = "command=verify-identities seed=" + std::to_string(c.seed) + " trials=" + std::to_string(c.trials) +
                "\n" + detail::identity_summary(rows);
  out.exit_code = detail::count_failed(rows) == 0 ? kExitOk : kExitCheckFailed;
  detail::write_summary(out, c.command);
  return out;
}

inline RunOutcome run_fem_check(const RunConfig& c, RunOutcome out) {
  const std::vector<double> orders = c.s_values.empty() ? default_identity_orders() : c.s_values;
  const fem::Discretization d = fem::discretize(fem::parse_domain(c.domain, c.refine));
  const std::string context = d.spec.name() + " refine=" + std::to_string(c.refine);
  const WeightedOperator& gamma = d.spaces.gamma;
  std::vector<ResidualReport> rows;

  const SvdFactors svd = weighted_svd(gamma);
  const double gamma_norm = svd.rank > 0 ? svd.values(0) : 0.0;
  rows.push_back(make_report("op_norm_gamma", std::abs(gamma_norm - 1.0), 1e-10, context));
  const Vector top = svd.right.col(0);
  rows.push_back(make_report("constant_maximizer", (top.array() - top(0)).abs().maxCoeff() / std::abs(top(0)), 1e-8,
                             context));
  rows.push_back(make_report("trace_surjective", static_cast<double>(d.boundary_dofs() - svd.rank), 0.0, context));

  const fem::SteklovSystem st = fem::steklov(d);
  rows.push_back(make_report("steklov_svd", (st.sigmas - svd.values).cwiseAbs().maxCoeff(), 1e-9, context));
  // continuum disk spectrum (1, 1, 2, 2, 3) as oracle, on disk meshes fine enough for 5%
  if (d.spec.kind == fem::DomainSpec::Kind::ngon && d.spec.sides >= 64 && c.refine >= 2) {
    const double disk[] = {1, 1, 2, 2, 3};
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) worst = std::max(worst, std::abs(st.lambdas(k) - disk[k - 1]) / disk[k - 1]);
    rows.push_back(make_report("steklov_disk", worst, 0.05, context));
  }

  const fem::HarmonicBasis hb = fem::harmonic_basis(d);
  rows.push_back(make_report("harmonic_dim", std::abs(static_cast<double>(hb.columns.cols() - d.boundary_dofs())), 0.0,
                             context));
  double equilibrium = 0.0;
  const Matrix kh = d.mats.K * hb.columns;
  for (int i : d.interior) equilibrium = std::max(equilibrium, kh.row(i).cwiseAbs().maxCoeff());
  rows.push_back(make_report("harmonic_equilibrium", equilibrium, 1e-10, context));

  const WeightedOperator lambda = pseudoinverse_from(gamma, svd);
  rows.push_back(make_report("penrose", penrose_defect(gamma, lambda), 1e-10, context));
  for (auto& r : check_resolvent_identities(gamma, lambda, context)) rows.push_back(std::move(r));
  rows.push_back(check_tb_pinv(gamma, lambda, context));
  rows.push_back(check_decomposition(gamma, lambda, context));
  const TbPair t = t_b(gamma, lambda);
  rows.push_back(make_report("tb_adjoint", relative(adjoint(t.tb).matrix() - t.tb_star.matrix(), t.tb_star.matrix()),
                             1e-10, context));
  for (auto& r : check_permutation(gamma, lambda, orders, context)) rows.push_back(std::move(r));

  std::ostringstream mesh_text;
  fem::write_mesh(mesh_text, d.mesh);
  detail::write_file(out, "mesh.txt", mesh_text.str());
  detail::write_file(out, "identities.csv", identities_csv(rows));

  std::ostringstream os;
  os << "command=fem-check domain=" << d.spec.name() << " refine=" << c.refine << " dofs=" << d.dofs()
     << " boundary_dofs=" << d.boundary_dofs() << '\n';
  os << "op_norm(Gamma)=" << detail::fixed12(gamma_norm) << '\n';
  os << "steklov_lambdas(1..5)=";
  for (Index k = 1; k <= std::min<Index>(5, st.lambdas.size() - 1); ++k) os << (k > 1 ? "," : "") << detail::fixed12(st.lambdas(k));
  os << '\n';
  if (!hb.warning.empty()) os << "warning: " << hb.warning << '\n';
  os << detail::identity_summary(rows);
  out.summary = os.str();
  out.exit_code = detail::count_failed(rows) == 0 ? kExitOk : kExitCheckFailed;
  detail::write_summary(out, c.command);
  return out;
}

inline RunOutcome run_constants(const RunConfig& c, RunOutcome out) {
  constexpr double kViolationTol = 1e-9;
  const std::vector<double> orders = c.s_values.empty() ? lab::default_scan_grid() : c.s_values;
  const auto modes = detail::modes_of(c);
  const fem::Discretization d = fem::discretize(fem::parse_domain(c.domain, c.refine));
  const lab::TraceSetting ts = lab::make_trace_setting(d);
  const lab::BergmanSetting bs = lab::make_bergman_setting(d);
  const lab::LabOptions opt{c.seed, 100, 1.0};

  std::vector<lab::ConstantsRow> rows;
  for (lab::NormMode mode : modes)
    for (double s : orders) rows.push_back(lab::trace_equivalence_constants(ts, s, mode, opt));
  for (lab::NormMode mode : modes)
    for (double s : lab::default_harmonic_grid()) rows.push_back(lab::harmonic_inequality_check(ts, s, mode, opt));
  const lab::BergmanReport berg = lab::bergman_sandwich(bs, opt);
  rows.push_back(berg.row);
  for (lab::NormMode mode : modes)
    for (auto& r : lab::interpolation_scan(bs, orders, mode, opt)) rows.push_back(std::move(r));

  std::size_t failed = 0;
  std::map<std::string, double> worst;
  for (const auto& r : rows) {
    const bool ok = std::isfinite(r.c_low) && std::isfinite(r.c_high) && r.c_low > 0.0 &&
                    r.c_low <= r.c_high * (1.0 + 1e-12) && r.worst_violation <= kViolationTol;
    if (!ok) ++failed;
    const std::string key = r.theorem + "/" + r.mode;
    worst[key] = worst.count(key) ? std::max(worst[key], r.worst_violation) : r.worst_violation;
  }
  const bool bergman_ok = berg.middle_identity <= 1e-9 && berg.extremal_low <= 1e-9 && berg.extremal_high <= 1e-9;
  if (!bergman_ok) ++failed;

  detail::write_file(out, "constants.csv", constants_csv(rows));
  std::ostringstream os;
  os << "command=constants domain=" << d.spec.name() << " refine=" << c.refine << " dofs=" << d.dofs()
     << " mode=" << c.mode << " seed=" << c.seed << '\n';
  os << "rows=" << rows.size() << " failed=" << failed << '\n';
  for (const auto& [key, value] : worst) os << "worst_violation(" << key << ")=" << format_double(value) << '\n';
  os << "bergman c_low=" << format_double(berg.row.c_low) << " c_high=" << format_double(berg.row.c_high)
     << " middle_identity=" << format_double(berg.middle_identity)
     << " extremal=" << format_double(std::max(berg.extremal_low, berg.extremal_high)) << '\n';
  if (!bs.warning.empty()) os << "warning: " << bs.warning << '\n';
  out.summary = os.str();
  out.exit_code = failed == 0 ? kExitOk : kExitCheckFailed;
  detail::write_summary(out, c.command);
  return out;
}

/// Aggregates identities.csv and constants.csv found in the output directory.
inline RunOutcome run_report(const RunConfig& c, RunOutcome out) {
  auto read_table = [&](const char* name, const char* header) -> std::optional<std::vector<std::vector<std::string>>> {
    std::ifstream in(out.output_dir / name, std::ios::binary);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != header)
      throw Error(Errc::io_error, std::string(name) + ": unexpected header");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line))
      if (!line.empty()) rows.push_back(detail::parse_csv_line(line));
    return rows;
  };
  const auto identities = read_table("identities.csv", kIdentitiesHeader);
  const auto constants = read_table("constants.csv", kConstantsHeader);
  if (!identities && !constants)
    throw Error(Errc::io_error, "no identities.csv or constants.csv in " + out.output_dir.string());

  std::ostringstream os;
  os << "command=report\n";
  std::size_t failed = 0;
  if (identities) {
    std::map<std::string, std::pair<std::size_t, double>> by_name;
    std::size_t skipped = 0;
    for (const auto& row : *identities) {
      if (row.size() != 5) throw Error(Errc::io_error, "identities.csv: malformed row");
      if (row[4] == "false") ++failed;
      if (row[4] == "skipped") {
        ++skipped;
        continue;
      }
      auto& slot = by_name[row[0]];
      ++slot.first;
      slot.second = std::max(slot.second, detail::table_number(row[2], "identities.csv"));
    }
    os << "identities rows=" << identities->size() << " failed=" << failed << " skipped=" << skipped << '\n';
    for (const auto& [name, v] : by_name)
      os << "  " << name << " rows=" << v.first << " max_residual=" << format_double(v.second) << '\n';
  }
  if (constants) {
    struct Range {
      std::size_t rows = 0;
      double c_low = INFINITY;
      double c_high = 0.0;
      double worst = -INFINITY;
    };
    std::map<std::string, Range> by_key;
    std::size_t violations = 0;
    for (const auto& row : *constants) {
      if (row.size() != 9) throw Error(Errc::io_error, "constants.csv: malformed row");
      Range& r = by_key[row[0] + "/" + row[8]];
      ++r.rows;
      r.c_low = std::min(r.c_low, detail::table_number(row[5], "constants.csv"));
      r.c_high = std::max(r.c_high, detail::table_number(row[6], "constants.csv"));
      r.worst = std::max(r.worst, detail::table_number(row[7], "constants.csv"));
      if (detail::table_number(row[7], "constants.csv") > 1e-9) ++violations;
    }
    failed += violations;
    os << "constants rows=" << constants->size() << " violations=" << violations << '\n';
    for (const auto& [key, r] : by_key)
      os << "  " << key << " rows=" << r.rows << " min_c_low=" << format_double(r.c_low)
         << " max_c_high=" << format_double(r.c_high) << " worst_violation=" << format_double(r.worst) << '\n';
  }
  out.summary = os.str();
  out.exit_code = failed == 0 ? kExitOk : kExitCheckFailed;
  detail::write_summary(out, c.command);
  return out;
}

/// Runs a validated configuration. Config and input errors come back as exit
/// code 2 with the message in `summary`; nothing is thrown.
inline RunOutcome run(const RunConfig& c) {
  RunOutcome out;
  try {
    validate(c);
    out.output_dir = resolve_output_dir(c);
    std::filesystem::create_directories(out.output_dir);
    if (c.command == "verify-identities") return run_verify_identities(c, std::move(out));
    if (c.command == "fem-check") return run_fem_check(c, std::move(out));
    if (c.command == "constants") return run_constants(c, std::move(out));
    return run_report(c, std::move(out));
  } catch (const Error& e) {
    const Errc code = e.code();
    const bool input_error = code == Errc::config_error || code == Errc::invalid_spec || code == Errc::io_error ||
                             code == Errc::s_out_of_range;
    out.exit_code = input_error ? kExitConfigError : kExitCheckFailed;
    out.summary = std::string(e.what()) + "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    out.exit_code = kExitConfigError;
    out.summary = std::string("IoError: ") + e.what() + "\n";
  }
  return out;
}

}  // namespace tracelab::cli

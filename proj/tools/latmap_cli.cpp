// Command-line front end: verification, expansion, classification, kernel
// computation, gauge application, and numeric sampling of the closed forms.
// Exit codes: 0 success (and, where applicable, consistent / within
// tolerance), 1 negative finding, 2 usage or input errors.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latmap/latmap.hpp"

using namespace latmap;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

// Report destination policy shared by the report-producing commands: the
// JSON document goes to --output when given; stdout carries the human
// summary, or the JSON itself under --json.
struct ReportSink {
  std::string output;
  bool json = false;

  void deliver(const nlohmann::ordered_json& doc,
               const std::string& human) const {
    if (!output.empty()) write_text(output, doc.dump(2) + "\n");
    if (json)
      std::fputs((doc.dump(2) + "\n").c_str(), stdout);
    else
      std::fputs(human.c_str(), stdout);
  }
};

// Deterministic state sampling for numeric-check. Modulo reduction keeps the
// draw identical across platforms; exact states use small heights, float
// states stay well inside the Darboux domain.
struct Sampler {
  std::mt19937_64 rng;

  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  int uniform(int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  PointState<Rational> exact_state() {
    PointState<Rational> st{4, {}};
    for (const FaceVariable& f : enumerate_faces(4))
      st.values[f] = Rational(uniform(-9, 9), uniform(1, 9));
    return st;
  }

  PointState<double> float_state() {
    PointState<double> st{4, {}};
    for (const FaceVariable& f : enumerate_faces(4))
      st.values[f] = static_cast<double>(rng() % 600001) / 1e6 - 0.3;
    return st;
  }
};

std::string describe_family(const MapFamily& fam) {
  return "n=" + std::to_string(fam.n()) + ", order=" +
         std::to_string(fam.order()) + ", " + symmetry_name(fam.symmetry());
}

int run_verify(const std::string& input, int order, const ReportSink& sink) {
  MapFamily fam = load_family(input);
  int degree = order > 0 ? order : fam.order();
  MapFamily truncated = fam.with_order(degree);
  ResidualReport report = second_stage_residual(truncated, degree);
  nlohmann::ordered_json doc = residual_report_to_json(report, fam.n());

  std::string human = "family: " + describe_family(fam) +
                      ", verified through degree " + std::to_string(degree) +
                      "\n";
  if (report.all_zero()) {
    human += "consistent: yes\n";
  } else {
    auto fail = *report.first_failure();
    human += "consistent: no\nfirst failure: face " + fail.face.digits() +
             ", pair (" + std::to_string(fail.k) + "," +
             std::to_string(fail.l) + "), degree " +
             std::to_string(fail.degree) + "\n";
  }
  sink.deliver(doc, human);
  return report.all_zero() ? 0 : 1;
}

int run_expand(int order, const std::string& output) {
  std::string text = family_to_text(expand_darboux(order));
  if (output.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(output, text);
  return 0;
}

nlohmann::ordered_json rational_table(
    const std::map<ComponentKey, Rational>& table) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table) out[key.label()] = to_string(value);
  return out;
}

nlohmann::ordered_json series_table(
    const std::map<ComponentKey, UnivariateSeries>& series) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [key, s] : series) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for (const auto& [d, c] : s.coeffs) entry[std::to_string(d)] = to_string(c);
    out[key.label()] = entry;
  }
  return out;
}

// Classification of an input family by its quadratic head: product heads go
// through the multiplicative relations, scaling removal, and the gauge
// normal form; square heads through the univariate/commuting checks.
int classify_family(MapFamily fam, int order, const ReportSink& sink) {
  if (order > 0) fam = fam.with_order(order);
  nlohmann::ordered_json doc;
  doc["input"] = {{"n", fam.n()},
                  {"order", fam.order()},
                  {"symmetry", symmetry_name(fam.symmetry())}};
  std::string human = "input: " + describe_family(fam) + "\n";

  if (auto alpha = leading_alpha(fam)) {
    doc["branch"] = "I";
    doc["alpha"] = rational_table(*alpha);
    human += "quadratic head: pure product alpha x_ik x_jk (branch I)\n";
    AlphaRelationCheck verdict = check_branch_I(*alpha);
    doc["admissible"] = verdict.admissible;
    if (!verdict.admissible) {
      auto [i, j, k, l] = *verdict.first_violation;
      doc["violation"] = {i, j, k, l};
      human += "alpha relations: violated at indices (" + std::to_string(i) +
               "," + std::to_string(j) + "," + std::to_string(k) + "," +
               std::to_string(l) + ")\n";
      sink.deliver(doc, human);
      return 1;
    }
    doc["violation"] = nullptr;
    human += "alpha relations: admissible\n";

    auto scalings = solve_face_scalings(*alpha);
    if (!scalings) {
      doc["face_scalings"] = nullptr;
      doc["normal_form"] = nullptr;
      human += "face scalings: none over the rationals; head not reducible "
               "to the unit product\n";
      sink.deliver(doc, human);
      return 0;
    }
    nlohmann::ordered_json ctab = nlohmann::ordered_json::object();
    for (const auto& [f, c] : *scalings) ctab[f.digits()] = to_string(c);
    doc["face_scalings"] = ctab;
    human += "face scalings: found\n";

    GaugeTransformation scale_gauge;
    for (const auto& [f, c] : *scalings)
      scale_gauge.set_scaling(f, Rational(1) / c);
    MapFamily unit_head = conjugate(fam, scale_gauge);
    try {
      auto [normalized, point_gauge] = normal_form(unit_head);
      GaugeTransformation total =
          compose_gauges(scale_gauge, point_gauge, fam.order());
      bool matches = normalized == expand_darboux(fam.order());
      doc["normal_form"] = {{"matches_darboux", matches},
                            {"gauge", gauge_to_json(total)}};
      human += std::string("normal form: ") +
               (matches ? "matches the darboux expansion through order " +
                              std::to_string(fam.order())
                        : "does not match the darboux expansion") +
               "\ngauge: " + gauge_to_json(total).dump() + "\n";
      sink.deliver(doc, human);
      return matches ? 0 : 1;
    } catch (const NormalFormError& e) {
      doc["normal_form"] = {{"error", e.what()}};
      human += std::string("normal form: unreachable, ") + e.what() + "\n";
      sink.deliver(doc, human);
      return 1;
    }
  }

  try {
    BranchIIVerdict verdict = check_branch_II(fam);
    doc["branch"] = "II";
    human += "quadratic head: pure square lambda x_ij^2 (branch II)\n";
    doc["univariate"] = verdict.univariate;
    if (!verdict.univariate) {
      doc["violation"] = {{"degree", verdict.univariate_violation->first},
                          {"component",
                           verdict.univariate_violation->second.label()}};
      human += "univariate: no, first violation at degree " +
               std::to_string(verdict.univariate_violation->first) + " on " +
               verdict.univariate_violation->second.label() + "\n";
      sink.deliver(doc, human);
      return 1;
    }
    doc["violation"] = nullptr;
    doc["commuting"] = verdict.commuting;
    doc["series"] = series_table(verdict.series);
    human += "univariate: yes\n";
    if (!verdict.commuting) {
      doc["mismatch"] = {{"face", verdict.commuting_mismatch->first.digits()},
                         {"degree", verdict.commuting_mismatch->second}};
      human += "commuting: no, face " +
               verdict.commuting_mismatch->first.digits() +
               " separates at degree " +
               std::to_string(verdict.commuting_mismatch->second) + "\n";
      sink.deliver(doc, human);
      return 1;
    }
    doc["mismatch"] = nullptr;
    human += "commuting: yes\n";
    sink.deliver(doc, human);
    return 0;
  } catch (const BranchMismatch&) {
    doc["branch"] = nullptr;
    doc["reason"] =
        "quadratic part is neither a pure product nor a nonzero pure square "
        "on every component";
    human += "quadratic head: degenerate or mixed; outside both branch "
             "normal forms\n";
    sink.deliver(doc, human);
    return 1;
  }
}

int run_classify(const std::string& input, int order, const ReportSink& sink) {
  if (!input.empty()) return classify_family(load_family(input), order, sink);

  // No input: audit the symbolic quadratic stage and the per-order kernels.
  int top = order > 0 ? order : 6;
  if (top < 3)
    throw ValidationError("classification without input needs --order >= 3");
  QuadraticAudit audit = audit_quadratic_stage();
  nlohmann::ordered_json doc;
  doc["quadratic_stage"] = {
      {"total_equations", audit.total_equations},
      {"branch_I_equations", audit.branch_I_equations},
      {"alpha_lambda_found", audit.alpha_lambda_found},
      {"beta_difference_found", audit.beta_difference_found},
      {"beta_sum_found", audit.beta_sum_found},
      {"mu_product_found", audit.mu_product_found},
      {"darboux_point_annihilates", audit.darboux_point_annihilates},
      {"complete", audit.complete()}};
  nlohmann::ordered_json dims = nlohmann::ordered_json::object();
  bool kernels_ok = true;
  for (int target = 3; target <= top; ++target) {
    int dim = static_cast<int>(homogeneous_kernel(target).size());
    dims[std::to_string(target)] = dim;
    kernels_ok = kernels_ok && dim == 6;
  }
  doc["kernel_dimensions"] = dims;

  char line[128];
  std::string human;
  std::snprintf(line, sizeof(line),
                "quadratic stage: %d equations; memberships %d/24 "
                "alpha-lambda, %d/24 beta-difference, %d/24 beta-sum, %d/24 "
                "mu-product\n",
                audit.total_equations, audit.alpha_lambda_found,
                audit.beta_difference_found, audit.beta_sum_found,
                audit.mu_product_found);
  human += line;
  human += std::string("darboux point annihilates the equations: ") +
           (audit.darboux_point_annihilates ? "yes" : "no") + "\n";
  human += "kernel dimensions:";
  for (int target = 3; target <= top; ++target)
    human += " degree " + std::to_string(target) + ": " +
             dims[std::to_string(target)].dump() + (target < top ? "," : "\n");
  sink.deliver(doc, human);
  return audit.complete() && kernels_ok ? 0 : 1;
}

int run_kernel(int target, bool dump_matrix, const ReportSink& sink) {
  HomogeneousSystem sys = build_homogeneous_system(target);
  auto basis = nullspace(sys.matrix);
  nlohmann::ordered_json doc;
  doc["target_degree"] = target;
  doc["columns"] = sys.columns.size();
  doc["rows"] = sys.rows.size();
  doc["kernel_dimension"] = basis.size();
  doc["basis"] = nlohmann::ordered_json::array();
  for (const auto& v : basis) {
    MapFamily element(4, target);
    for (const auto& [key, poly] : sys.unpack(v))
      element.set_term(key, target, poly);
    doc["basis"].push_back(family_to_json(element));
  }
  if (dump_matrix) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (int r = 0; r < sys.matrix.row_count(); ++r)
      for (const auto& [c, value] : sys.matrix.row(r))
        entries.push_back({r, c, to_string(value)});
    doc["matrix"] = {{"rows", sys.matrix.row_count()},
                     {"cols", sys.matrix.col_count()},
                     {"entries", entries}};
  }
  std::string human = "target degree " + std::to_string(target) + ": " +
                      std::to_string(sys.rows.size()) + " equations in " +
                      std::to_string(sys.columns.size()) +
                      " coefficients, kernel dimension " +
                      std::to_string(basis.size()) + "\n";
  sink.deliver(doc, human);
  return 0;
}

int run_gauge_apply(const std::string& input, const std::string& gauge_path,
                    const std::string& output) {
  MapFamily fam = load_family(input);
  GaugeTransformation g = load_gauge(gauge_path);
  std::string text = family_to_text(conjugate(fam, g));
  if (output.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(output, text);
  return 0;
}

int run_numeric_check(const std::string& map_name, std::string mode,
                      int trials, std::uint64_t seed, double tolerance,
                      const ReportSink& sink) {
  MapKind kind =
      map_name == "darboux" ? MapKind::darboux : MapKind::star_triangle;
  if (mode.empty())
    mode = kind == MapKind::darboux ? "float" : "exact";
  if (kind == MapKind::darboux && mode == "exact")
    throw ValidationError(
        "the darboux closed form has no exact evaluation; use --mode float");
  ClosedFormMap map{kind};
  Sampler sampler(seed);

  nlohmann::ordered_json doc;
  doc["map"] = map_name;
  doc["mode"] = mode;
  doc["trials"] = trials;
  doc["seed"] = seed;
  long resamples = 0;
  const long resample_cap = 1000L * trials + 10000;
  std::string human;
  char line[160];

  if (mode == "exact") {
    int zero_count = 0;
    for (int done = 0; done < trials;) {
      if (resamples > resample_cap)
        throw std::runtime_error("resample budget exhausted");
      PointState<Rational> st = sampler.exact_state();
      try {
        auto rows = numeric_residual(map, st);
        bool all_zero = true;
        for (const auto& row : rows) all_zero = all_zero && row.magnitude == 0;
        if (all_zero) ++zero_count;
        ++done;
      } catch (const DomainError&) {
        ++resamples;
      }
    }
    doc["resamples"] = resamples;
    doc["zero_count"] = zero_count;
    doc["all_zero"] = zero_count == trials;
    std::snprintf(line, sizeof(line),
                  "%s, exact arithmetic: %d/%d states with all six residuals "
                  "exactly zero (%ld resamples)\n",
                  map_name.c_str(), zero_count, trials, resamples);
    human += line;
    sink.deliver(doc, human);
    return zero_count == trials ? 0 : 1;
  }

  doc["tolerance"] = tolerance;
  double worst = 0.0, sum = 0.0;
  long measured = 0;
  for (int done = 0; done < trials;) {
    if (resamples > resample_cap)
      throw std::runtime_error("resample budget exhausted");
    PointState<double> st = sampler.float_state();
    try {
      auto rows = numeric_residual(map, st);
      for (const auto& row : rows) {
        worst = std::max(worst, row.magnitude);
        sum += row.magnitude;
        ++measured;
      }
      ++done;
    } catch (const DomainError&) {
      ++resamples;
    }
  }
  doc["resamples"] = resamples;
  doc["max_residual"] = worst;
  doc["mean_residual"] = measured > 0 ? sum / static_cast<double>(measured) : 0.0;
  doc["within_tolerance"] = worst < tolerance;
  std::snprintf(line, sizeof(line),
                "%s, float arithmetic: max residual %.3e, mean %.3e over %d "
                "states (%ld resamples), tolerance %.1e\n",
                map_name.c_str(), worst,
                measured > 0 ? sum / static_cast<double>(measured) : 0.0,
                trials, resamples, tolerance);
  human += line;
  sink.deliver(doc, human);
  return worst < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact verification and classification of lattice map "
               "families given as identity perturbations"};
  app.require_subcommand(1);

  std::string input, output, gauge_path, map_name, mode;
  int order = 0, expand_order = 6, kernel_degree = 3, trials = 100;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  bool json = false, dump_matrix = false;

  CLI::App* verify = app.add_subcommand(
      "verify", "check the consistency residual of a family file");
  verify->add_option("-i,--input", input, "family JSON file")->required();
  verify->add_option("--order", order, "verification degree (default: the file's order)")
      ->check(CLI::Range(2, 64));
  verify->add_option("-o,--output", output, "write the JSON report here");
  verify->add_flag("--json", json, "print the JSON report instead of a summary");

  CLI::App* expand = app.add_subcommand(
      "expand-darboux", "series expansion of the symmetric closed form");
  expand->add_option("--order", expand_order, "truncation order")
      ->default_val(6)
      ->check(CLI::Range(2, 64));
  expand->add_option("-o,--output", output, "write the family here (default: stdout)");

  CLI::App* classify = app.add_subcommand(
      "classify", "classify a family file, or audit the symbolic stage");
  classify->add_option("-i,--input", input, "family JSON file (optional)");
  classify->add_option("--order", order,
                       "truncation / kernel-depth order (default: file order, or 6)")
      ->check(CLI::Range(2, 64));
  classify->add_option("-o,--output", output, "write the JSON report here");
  classify->add_flag("--json", json, "print the JSON report instead of a summary");

  CLI::App* kernel = app.add_subcommand(
      "kernel", "kernel of the linear consistency stage at one degree");
  kernel->add_option("--order", kernel_degree, "target degree")
      ->default_val(3)
      ->check(CLI::Range(3, 16));
  kernel->add_option("-o,--output", output, "write the JSON report here");
  kernel->add_flag("--json", json, "print the JSON report instead of a summary");
  kernel->add_flag("--dump-matrix", dump_matrix, "include the sparse matrix entries");

  CLI::App* gauge_apply = app.add_subcommand(
      "gauge-apply", "conjugate a family by a gauge transformation");
  gauge_apply->add_option("-i,--input", input, "family JSON file")->required();
  gauge_apply->add_option("-g,--gauge", gauge_path, "gauge JSON file")->required();
  gauge_apply->add_option("-o,--output", output,
                          "write the family here (default: stdout)");

  CLI::App* numeric = app.add_subcommand(
      "numeric-check", "sample closed-form commutators at random states");
  numeric->add_option("--map", map_name, "closed form to sample")
      ->required()
      ->check(CLI::IsMember({"darboux", "star-triangle"}));
  numeric->add_option("--mode", mode, "exact or float (default depends on the map)")
      ->check(CLI::IsMember({"exact", "float"}));
  numeric->add_option("--trials", trials, "number of sampled states")
      ->default_val(100)
      ->check(CLI::Range(1, 10000000));
  numeric->add_option("--seed", seed, "sampling seed")->default_val(0);
  numeric->add_option("--tolerance", tolerance, "float-mode bound")
      ->default_val(1e-10)
      ->check(CLI::PositiveNumber);
  numeric->add_option("-o,--output", output, "write the JSON report here");
  numeric->add_flag("--json", json, "print the JSON report instead of a summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ReportSink sink{output, json};
  try {
    if (*verify) return run_verify(input, order, sink);
    if (*expand) return run_expand(expand_order, output);
    if (*classify) return run_classify(input, order, sink);
    if (*kernel) return run_kernel(kernel_degree, dump_matrix, sink);
    if (*gauge_apply) return run_gauge_apply(input, gauge_path, output);
    if (*numeric)
      return run_numeric_check(map_name, mode, trials, seed, tolerance, sink);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

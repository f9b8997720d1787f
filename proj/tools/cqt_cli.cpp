// Scenario-file front end: load a Hilbert-space scenario, classify its
// history family, query probabilities, run static analyses, or run the
// bundled demonstrators.
//
// Exit codes for `check`: 0 medium consistent, 2 weakly consistent only,
// 3 inconsistent, 1 input or usage error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cqt/oracles.hpp"
#include "cqt/scenario.hpp"

namespace {

using namespace cqt;

std::string fixed12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12f", v);
  return buf;
}

// User-facing history label: 1-based member indices, comma separated.
std::string history_label(const Family& fam, std::size_t flat) {
  const HistoryIndex h = fam.history_at(flat);
  std::ostringstream out;
  for (std::size_t n = 0; n < h.j.size(); ++n) {
    if (n) out << ",";
    out << h.j[n] + 1;
  }
  return out.str();
}

// Parses "2,1,3" (1-based, one member per time) into a HistoryIndex; each
// slot may be a '+'-joined union like "1+2", in which case the selection is
// a homogeneous compound event.
struct HistorySelector {
  std::vector<std::vector<int>> masks;  // 0-based member lists per time
  bool compound = false;
};

HistorySelector parse_selector(const std::string& text, const Family& fam) {
  HistorySelector sel;
  std::stringstream ss(text);
  std::string field;
  int n = 0;
  while (std::getline(ss, field, ',')) {
    if (n >= fam.num_times()) throw ParseError("history selector has more entries than times");
    std::vector<int> members;
    std::stringstream fs(field);
    std::string piece;
    while (std::getline(fs, piece, '+')) {
      std::size_t used = 0;
      int j = 0;
      try {
        j = std::stoi(piece, &used);
      } catch (const std::exception&) {
        throw ParseError("history selector: bad index \"" + piece + "\"");
      }
      if (used != piece.size()) throw ParseError("history selector: bad index \"" + piece + "\"");
      if (j < 1 || j > fam.members_at(n))
        throw ParseError("history selector: index " + piece + " out of range at time " +
                         std::to_string(n + 1));
      members.push_back(j - 1);
    }
    if (members.empty()) throw ParseError("history selector: empty entry");
    if (members.size() > 1) sel.compound = true;
    sel.masks.push_back(std::move(members));
    ++n;
  }
  if (n != fam.num_times())
    throw ParseError("history selector must pick members for all " +
                     std::to_string(fam.num_times()) + " times");
  return sel;
}

int run_check(const std::string& path, double tol_dec, const std::string& format) {
  const Scenario sc = Scenario::load(path);
  const Family fam = sc.to_family();
  const DecoherenceReport report = classify(fam, tol_dec);

  if (format == "json") {
    Json out;
    out["version"] = 1;
    out["scenario_hash"] = scenario_hash(sc);
    out["verdict"] = to_string(report.verdict);
    out["D_offdiag_max"] = report.offdiag_max();
    Json probs = Json::array();
    for (Eigen::Index i = 0; i < report.probabilities.size(); ++i)
      probs.push_back(report.probabilities(i));
    out["probabilities"] = std::move(probs);
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "verdict: " << to_string(report.verdict) << "\n";
    std::cout << "worst off-diagonal |D|: " << report.offdiag_max() << " at histories ("
              << history_label(fam, report.worst_offdiag.first) << ") vs ("
              << history_label(fam, report.worst_offdiag.second) << ")\n";
    std::cout << "elementary probabilities:\n";
    for (Eigen::Index i = 0; i < report.probabilities.size(); ++i)
      std::cout << "  (" << history_label(fam, static_cast<std::size_t>(i))
                << ")  " << fixed12(report.probabilities(i)) << "\n";
  }

  switch (report.verdict) {
    case Verdict::MediumConsistent: return 0;
    case Verdict::WeakOnly: return 2;
    case Verdict::Inconsistent: return 3;
  }
  return 1;
}

int run_prob(const std::string& path, const std::string& selector, double tol_dec) {
  const Scenario sc = Scenario::load(path);
  const Family fam = sc.to_family();
  const HistorySelector sel = parse_selector(selector, fam);

  if (!sel.compound) {
    HistoryIndex h;
    for (const auto& m : sel.masks) h.j.push_back(m.front());
    std::cout << fixed12(born_probability(fam, h)) << "\n";
    return 0;
  }

  // Compound (homogeneous) event: requires a framework, i.e. medium
  // decoherence; otherwise the two evaluation routes conflict.
  const DecoherenceReport report = classify(fam, tol_dec);
  std::vector<HistoryIndex> elements;
  std::vector<int> cursor(sel.masks.size(), 0);
  while (true) {
    HistoryIndex h;
    for (std::size_t n = 0; n < sel.masks.size(); ++n)
      h.j.push_back(sel.masks[n][static_cast<std::size_t>(cursor[n])]);
    elements.push_back(std::move(h));
    int n = static_cast<int>(sel.masks.size()) - 1;
    while (n >= 0 && ++cursor[static_cast<std::size_t>(n)] ==
                         static_cast<int>(sel.masks[static_cast<std::size_t>(n)].size())) {
      cursor[static_cast<std::size_t>(n)] = 0;
      --n;
    }
    if (n < 0) break;
  }
  const DynamicEvent event(fam, std::move(elements));
  std::cout << fixed12(event_probability(fam, event, report)) << "\n";
  return 0;
}

int run_static(const std::string& path, const std::string& event_text,
               const std::string& format) {
  const Scenario sc = Scenario::load(path);
  const Family fam = sc.to_family();

  // The first step's sample space, with its projectors carried back to t0 in
  // the Heisenberg picture: the single-time reduction of the dynamic theory.
  std::vector<Subspace> evolved;
  for (int j = 0; j < fam.members_at(0); ++j)
    evolved.push_back(Subspace::from_projector(fam.heisenberg_projector(0, j)));
  const FrameworkStatic fw(SampleSpace::validate(evolved));

  EventMask mask = 0;
  {
    std::stringstream ss(event_text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      std::size_t used = 0;
      int idx = 0;
      try {
        idx = std::stoi(piece, &used);
      } catch (const std::exception&) {
        throw ParseError("event mask: bad index \"" + piece + "\"");
      }
      if (used != piece.size() || idx < 1 || idx > fw.atom_count())
        throw ParseError("event mask: index \"" + piece + "\" out of range");
      mask |= EventMask{1} << (idx - 1);
    }
  }

  const StateDensity rho = sc.state();
  const ProbabilityFunction p(rho, fw);
  const double value = p(mask);

  std::string truth = "n/a (mixed state)";
  if (rho.ket()) {
    const auto tv = pure_truth_values(*rho.ket(), fw);
    switch (tv.at(mask)) {
      case TruthValue::True: truth = "True"; break;
      case TruthValue::False: truth = "False"; break;
      case TruthValue::Indeterminate: truth = "Indeterminate"; break;
    }
  }

  if (format == "json") {
    Json out;
    out["version"] = 1;
    out["scenario_hash"] = scenario_hash(sc);
    out["probability"] = value;
    out["truth"] = truth;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "P(event) = " << fixed12(value) << "\n";
    std::cout << "truth value: " << truth << "\n";
  }
  return 0;
}

int run_demo(const std::string& name, unsigned long long seed) {
  if (name == "mermin") {
    const NoGoInstance inst = NoGoInstance::peres_mermin();
    const int count = mermin_no_go(inst);
    std::cout << count << " satisfying assignments of 512\n";
    std::cout << (count == 0 ? "PASS" : "FAIL")
              << ": the Peres-Mermin constraints admit no noncontextual value assignment\n";
    return count == 0 ? 0 : 1;
  }
  if (name == "cz") {
    Rng rng(seed);
    bool all = true;
    for (int k = 0; k < 10; ++k) {
      const Eigen::Index dim = 3 + static_cast<Eigen::Index>(k % 4);
      std::uniform_int_distribution<Eigen::Index> pick_rank(1, dim - 1);
      const CZInstance inst(StateDensity::mixed(random_density_matrix(dim, rng)),
                            Projector(random_projector_matrix(dim, pick_rank(rng), rng)));
      const CZReport report = cz_check(inst, 20, rng);
      for (const CZCheck& c : report.checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << " dim=" << dim << " " << c.name
                  << " residual=" << c.residual << " tol=" << c.tolerance << "\n";
        all = all && c.pass;
      }
    }
    return all ? 0 : 1;
  }
  if (name == "two-slit") {
    for (bool marked : {false, true}) {
      const Family fam = build_two_slit(marked);
      const DecoherenceReport report = classify(fam);
      std::cout << (marked ? "marked" : "unmarked") << ": " << to_string(report.verdict)
                << ", worst off-diagonal |D| = " << report.offdiag_max() << "\n";
    }
    return 0;
  }
  if (name == "diosi") {
    const Family f = diosi_witness_family();
    const DiosiReport report = diosi_check(f, f);
    std::cout << "subsystem verdicts: " << to_string(report.verdict1) << " / "
              << to_string(report.verdict2) << "\n";
    std::cout << "joint verdict: " << to_string(report.joint_verdict) << "\n";
    std::cout << "factorization residual: " << report.factorization_residual << "\n";
    if (report.witness) {
      std::cout << "witness: D1 = (" << report.witness->d1.real() << ","
                << report.witness->d1.imag() << "), D2 = (" << report.witness->d2.real() << ","
                << report.witness->d2.imag() << "), Re(D1 D2) = " << report.witness->joint_re
                << "\n";
      std::cout << "weak decoherence does not survive composition; medium does\n";
    } else {
      std::cout << "no witness found in this instance\n";
    }
    return 0;
  }
  std::cerr << "unknown demo \"" << name << "\" (expected two-slit | mermin | cz | diosi)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compatible Quantum Theory engine: frameworks, histories and consistency"};
  app.require_subcommand(1);

  double tol_dec = cqt::tol::dec;
  std::string format = "table";
  unsigned long long seed = 20240913ull;
  app.add_option("--tol", tol_dec, "decoherence tolerance on |D| entries")->capture_default_str();
  app.add_option("--format", format, "output format: table | json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "seed for randomized demos")->capture_default_str();

  std::string check_file, prob_file, prob_history, static_file, static_event, demo_name;

  CLI::App* check = app.add_subcommand("check", "classify a scenario's history family");
  check->add_option("file", check_file, "scenario file")->required();

  CLI::App* prob = app.add_subcommand("prob", "probability of a history");
  prob->add_option("file", prob_file, "scenario file")->required();
  prob->add_option("--history", prob_history,
                   "1-based member per time, e.g. 1,2; use + for unions, e.g. 1+2,1")
      ->required();

  CLI::App* stat = app.add_subcommand("static", "static probability of an event");
  stat->add_option("file", static_file, "scenario file")->required();
  stat->add_option("--event", static_event, "1-based atom indices, e.g. 1,3")->required();

  CLI::App* demo = app.add_subcommand("demo", "bundled demonstrators");
  demo->add_option("name", demo_name, "two-slit | mermin | cz | diosi")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(check_file, tol_dec, format);
    if (prob->parsed()) return run_prob(prob_file, prob_history, tol_dec);
    if (stat->parsed()) return run_static(static_file, static_event, format);
    if (demo->parsed()) return run_demo(demo_name, seed);
  } catch (const cqt::InconsistentFamilyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const cqt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#pragma once

// Scenario files: a JSON tree describing a Hilbert space, a state, an
// optional Hamiltonian, projection steps and optional queries. Complex
// numbers are [re, im] pairs, matrices row-major nested lists. Parse errors
// carry the path of the offending field.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqt/histories.hpp"

namespace cqt {

using Json = nlohmann::json;

struct ParseError : Error {
  using Error::Error;
};

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

inline const Json& member(const Json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline Complex complex_value(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "expected a complex number as [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline Ket ket_value(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty vector");
  Ket v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_value(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline CMatrix matrix_value(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty matrix");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  CMatrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].empty()) fail(row_path, "expected a matrix row");
    if (r == 0) {
      cols = j[r].size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (j[r].size() != cols) {
      fail(row_path, "ragged matrix row");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_value(j[r][c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Json ket_json(const Ket& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline Json matrix_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

// A subspace is given either by a spanning basis or by its projector.
inline Subspace subspace_value(const Json& j, const std::string& path, Eigen::Index expected_dim) {
  if (!j.is_object()) fail(path, "expected a subspace object");
  if (j.contains("basis")) {
    const Json& b = j.at("basis");
    if (!b.is_array()) fail(path + ".basis", "expected a list of vectors");
    if (b.empty()) return Subspace::zero(expected_dim);
    std::vector<Ket> vecs;
    for (std::size_t i = 0; i < b.size(); ++i)
      vecs.push_back(ket_value(b[i], path + ".basis[" + std::to_string(i) + "]"));
    for (const Ket& v : vecs)
      if (v.size() != expected_dim) fail(path + ".basis", "vector dimension mismatch");
    try {
      return Subspace::span_of(vecs);
    } catch (const Error& e) {
      fail(path + ".basis", e.what());
    }
  }
  if (j.contains("projector")) {
    const CMatrix m = matrix_value(j.at("projector"), path + ".projector");
    if (m.rows() != expected_dim) fail(path + ".projector", "dimension mismatch");
    try {
      return Subspace::from_projector(Projector(m));
    } catch (const Error& e) {
      fail(path + ".projector", e.what());
    }
  }
  fail(path, "expected either \"basis\" or \"projector\"");
}

inline Json subspace_json(const Subspace& s) {
  Json out = Json::object();
  Json basis = Json::array();
  for (const Ket& v : s.basis()) basis.push_back(ket_json(v));
  out["basis"] = std::move(basis);
  return out;
}

}  // namespace scenario_detail

struct ScenarioStep {
  double t = 0.0;
  std::vector<Subspace> members;
};

struct ScenarioQuery {
  std::string kind;  // probability | classify | truth | noncontextuality
  Json args;
};

// Validated scenario; to_family() builds the engine value.
struct Scenario {
  Eigen::Index dim = 0;
  double t0 = 0.0;
  std::optional<Ket> pure_state;
  std::optional<CMatrix> mixed_state;
  CMatrix hamiltonian;  // zero when absent in the file
  std::vector<ScenarioStep> steps;
  std::vector<ScenarioQuery> queries;

  StateDensity state() const {
    if (pure_state) return StateDensity::pure(*pure_state);
    return StateDensity::mixed(*mixed_state);
  }

  Family to_family() const {
    std::vector<double> times;
    std::vector<SampleSpace> spaces;
    for (const ScenarioStep& s : steps) {
      times.push_back(s.t);
      spaces.push_back(SampleSpace::validate(s.members));
    }
    return Family(t0, state(), Hamiltonian(hamiltonian), std::move(times), std::move(spaces));
  }

  static Scenario parse(const Json& j) {
    using namespace scenario_detail;
    Scenario sc;
    const std::string root = "scenario";
    const double dim_raw = number(member(j, root, "dim"), root + ".dim");
    if (dim_raw < 1 || dim_raw != std::floor(dim_raw)) fail(root + ".dim", "expected a positive integer");
    sc.dim = static_cast<Eigen::Index>(dim_raw);

    sc.t0 = j.contains("t0") ? number(j.at("t0"), root + ".t0") : 0.0;

    const Json& st = member(j, root, "state");
    if (st.contains("pure")) {
      Ket psi = ket_value(st.at("pure"), root + ".state.pure");
      if (psi.size() != sc.dim) fail(root + ".state.pure", "dimension mismatch");
      if (!is_normalized(psi)) fail(root + ".state.pure", "vector is not normalized");
      sc.pure_state = std::move(psi);
    } else if (st.contains("mixed")) {
      CMatrix rho = matrix_value(st.at("mixed"), root + ".state.mixed");
      if (rho.rows() != sc.dim || rho.cols() != sc.dim)
        fail(root + ".state.mixed", "dimension mismatch");
      try {
        (void)StateDensity::mixed(rho);
      } catch (const Error& e) {
        fail(root + ".state.mixed", e.what());
      }
      sc.mixed_state = std::move(rho);
    } else {
      fail(root + ".state", "expected either \"pure\" or \"mixed\"");
    }

    if (j.contains("hamiltonian")) {
      sc.hamiltonian = matrix_value(j.at("hamiltonian"), root + ".hamiltonian");
      if (sc.hamiltonian.rows() != sc.dim || sc.hamiltonian.cols() != sc.dim)
        fail(root + ".hamiltonian", "dimension mismatch");
      if (!is_hermitian(sc.hamiltonian)) fail(root + ".hamiltonian", "matrix is not Hermitian");
    } else {
      sc.hamiltonian = CMatrix::Zero(sc.dim, sc.dim);
    }

    const Json& steps = member(j, root, "steps");
    if (!steps.is_array() || steps.empty()) fail(root + ".steps", "expected a nonempty list");
    double prev_t = sc.t0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::string sp = root + ".steps[" + std::to_string(i) + "]";
      ScenarioStep step;
      step.t = number(member(steps[i], sp, "t"), sp + ".t");
      if (!(step.t > prev_t)) fail(sp + ".t", "times must be strictly increasing after t0");
      prev_t = step.t;
      const Json& space = member(steps[i], sp, "space");
      const Json& members = member(space, sp + ".space", "members");
      if (!members.is_array() || members.empty())
        fail(sp + ".space.members", "expected a nonempty list");
      for (std::size_t k = 0; k < members.size(); ++k)
        step.members.push_back(subspace_value(
            members[k], sp + ".space.members[" + std::to_string(k) + "]", sc.dim));
      try {
        (void)SampleSpace::validate(step.members);
      } catch (const Error& e) {
        fail(sp + ".space", e.what());
      }
      sc.steps.push_back(std::move(step));
    }

    if (j.contains("queries")) {
      const Json& qs = j.at("queries");
      if (!qs.is_array()) fail(root + ".queries", "expected a list");
      for (std::size_t i = 0; i < qs.size(); ++i) {
        const std::string qp = root + ".queries[" + std::to_string(i) + "]";
        ScenarioQuery q;
        const Json& kind = member(qs[i], qp, "kind");
        if (!kind.is_string()) fail(qp + ".kind", "expected a string");
        q.kind = kind.get<std::string>();
        if (q.kind != "probability" && q.kind != "classify" && q.kind != "truth" &&
            q.kind != "noncontextuality")
          fail(qp + ".kind", "unknown query kind \"" + q.kind + "\"");
        q.args = qs[i];
        q.args.erase("kind");
        sc.queries.push_back(std::move(q));
      }
    }
    return sc;
  }

  static Scenario load(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ParseError("cannot open scenario file: " + filename);
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw ParseError(filename + ": invalid JSON: " + e.what());
    }
    return parse(j);
  }

  Json serialize() const {
    using namespace scenario_detail;
    Json j = Json::object();
    j["dim"] = static_cast<std::int64_t>(dim);
    j["t0"] = t0;
    if (pure_state) j["state"] = Json{{"pure", ket_json(*pure_state)}};
    else j["state"] = Json{{"mixed", matrix_json(*mixed_state)}};
    j["hamiltonian"] = matrix_json(hamiltonian);
    Json steps_json = Json::array();
    for (const ScenarioStep& s : steps) {
      Json members = Json::array();
      for (const Subspace& m : s.members) members.push_back(subspace_json(m));
      steps_json.push_back(Json{{"t", s.t}, {"space", Json{{"members", std::move(members)}}}});
    }
    j["steps"] = std::move(steps_json);
    if (!queries.empty()) {
      Json qs = Json::array();
      for (const ScenarioQuery& q : queries) {
        Json item = q.args;
        item["kind"] = q.kind;
        qs.push_back(std::move(item));
      }
      j["queries"] = std::move(qs);
    }
    return j;
  }
};

// FNV-1a over the canonical serialization; stable across runs and platforms
// with the same JSON text.
inline std::string scenario_hash(const Scenario& sc) {
  const std::string text = sc.serialize().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace cqt

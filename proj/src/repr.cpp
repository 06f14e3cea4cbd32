#include "prmix/repr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prmix/error.hpp"
#include "prmix/rng.hpp"

namespace prmix {

namespace {

std::string fmt_elem(int a) { return std::to_string(a); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Complex inner_characters(const FiniteGroup& g, const Irrep& x, const Irrep& y) {
  Complex s = 0;
  for (int a = 0; a < g.order(); ++a) s += x.character(a) * std::conj(y.character(a));
  return s / static_cast<double>(g.order());
}

}  // namespace

void validate_irrep(const FiniteGroup& g, const Irrep& rho) {
  const int q = g.order();
  const std::string who = "irrep '" + rho.label + "': ";
  if (rho.dim < 1) throw Error(ErrorCode::ValidationFailed, who + "dimension must be positive");
  if (static_cast<int>(rho.matrices.size()) != q)
    throw Error(ErrorCode::ValidationFailed, who + "expected " + std::to_string(q) + " matrices");
  for (int a = 0; a < q; ++a)
    if (rho.matrices[a].rows() != rho.dim || rho.matrices[a].cols() != rho.dim)
      throw Error(ErrorCode::ValidationFailed, who + "matrix of element " + fmt_elem(a) + " has wrong shape");
  const CMatrix id = CMatrix::Identity(rho.dim, rho.dim);
  if (max_abs(rho.matrices[0] - id) > kUnitaryTol)
    throw Error(ErrorCode::ValidationFailed, who + "rho(id) != I");
  for (int a = 0; a < q; ++a)
    if (max_abs(rho.matrices[a] * rho.matrices[a].adjoint() - id) > kUnitaryTol)
      throw Error(ErrorCode::ValidationFailed, who + "rho(" + fmt_elem(a) + ") is not unitary");
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      if (max_abs(rho.matrices[g.mul(a, b)] - rho.matrices[a] * rho.matrices[b]) > kUnitaryTol)
        throw Error(ErrorCode::ValidationFailed,
                    who + "rho(ab) != rho(a)rho(b) at a=" + fmt_elem(a) + ", b=" + fmt_elem(b));
  Complex norm = inner_characters(g, rho, rho);
  if (std::abs(norm - 1.0) > kCharacterTol)
    throw Error(ErrorCode::ValidationFailed, who + "(1/Q) sum |chi|^2 = " + std::to_string(norm.real()) + " != 1");
  Complex with_trivial = 0;
  for (int a = 0; a < q; ++a) with_trivial += rho.character(a);
  if (std::abs(with_trivial) / q > kCharacterTol)
    throw Error(ErrorCode::ValidationFailed, who + "is the trivial representation");
}

RepSet::RepSet(GroupPtr group, std::vector<Irrep> irreps) : group_(std::move(group)), irreps_(std::move(irreps)) {
  const FiniteGroup& g = *group_;
  long long dims = 0;
  for (const auto& r : irreps_) {
    validate_irrep(g, r);
    dims += static_cast<long long>(r.dim) * r.dim;
  }
  if (dims != g.order() - 1)
    throw Error(ErrorCode::ValidationFailed, "completeness: sum d^2 = " + std::to_string(dims) +
                                                 " but Q - 1 = " + std::to_string(g.order() - 1));
  for (std::size_t i = 0; i < irreps_.size(); ++i)
    for (std::size_t j = i + 1; j < irreps_.size(); ++j)
      if (std::abs(inner_characters(g, irreps_[i], irreps_[j])) > kCharacterTol)
        throw Error(ErrorCode::ValidationFailed,
                    "characters of '" + irreps_[i].label + "' and '" + irreps_[j].label + "' are not orthogonal");
}

namespace {

Irrep scalar_irrep(std::string label, std::vector<Complex> values) {
  Irrep r;
  r.label = std::move(label);
  r.dim = 1;
  for (Complex v : values) {
    CMatrix m(1, 1);
    m(0, 0) = v;
    r.matrices.push_back(m);
  }
  return r;
}

// exp(2 pi i k/q), exact at multiples of a quarter turn.
Complex root_of_unity(long long k, int q) {
  if ((4 * k) % q == 0) {
    constexpr Complex quarter[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return quarter[(4 * k / q) % 4];
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / q);
}

std::vector<Irrep> cyclic_irreps(int q) {
  std::vector<Irrep> out;
  for (int l = 0; l < q; ++l) {
    std::vector<Complex> vals;
    for (int a = 0; a < q; ++a) vals.push_back(root_of_unity((static_cast<long long>(a) * l) % q, q));
    out.push_back(scalar_irrep(l == 0 ? "1" : "chi" + std::to_string(l), std::move(vals)));
  }
  return out;
}

// Orthonormal basis of the sum-zero subspace of R^k.
Eigen::MatrixXd helmert(int k) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k - 1);
  for (int j = 1; j < k; ++j) {
    double s = 1.0 / std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) b(i, j - 1) = s;
    b(j, j - 1) = -j * s;
  }
  return b;
}

Eigen::MatrixXd permutation_matrix(const std::vector<int>& p) {
  const int k = static_cast<int>(p.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int x = 0; x < k; ++x) m(p[x], x) = 1.0;
  return m;
}

int perm_sign(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
  return inv % 2 ? -1 : 1;
}

Irrep standard_from_perms(std::string label, const std::vector<std::vector<int>>& perms) {
  const int k = static_cast<int>(perms.front().size());
  Eigen::MatrixXd b = helmert(k);
  Irrep r;
  r.label = std::move(label);
  r.dim = k - 1;
  for (const auto& p : perms) r.matrices.push_back((b.transpose() * permutation_matrix(p) * b).cast<Complex>());
  return r;
}

std::vector<Irrep> symmetric_irreps(int k) {
  std::vector<std::vector<int>> perms;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  const std::size_t q = perms.size();

  std::vector<Irrep> out;
  out.push_back(scalar_irrep("1", std::vector<Complex>(q, 1.0)));
  if (k < 2) return out;
  std::vector<Complex> sg;
  for (const auto& x : perms) sg.push_back(static_cast<double>(perm_sign(x)));
  out.push_back(scalar_irrep("sign", sg));
  if (k == 2) return out;
  Irrep std_rep = standard_from_perms("std", perms);
  out.push_back(std_rep);
  if (k == 4) {
    Irrep twisted = std_rep;
    twisted.label = "std*sign";
    for (std::size_t a = 0; a < q; ++a) twisted.matrices[a] *= sg[a];
    out.push_back(twisted);
    // Action on the three pairings {01|23}, {02|13}, {03|12}.
    auto pairing_of = [](int x, int y) {
      int lo = std::min(x, y), hi = std::max(x, y);
      if (lo == 0) return hi - 1;
      // pairing containing {lo,hi} with lo > 0 is the one whose complement contains 0
      int partner = 6 - lo - hi;  // the other element paired with 0
      return partner - 1;
    };
    std::vector<std::vector<int>> images;
    for (const auto& x : perms) {
      std::vector<int> img(3);
      for (int t = 0; t < 3; ++t) img[t] = pairing_of(x[0], x[t + 1]);
      images.push_back(img);
    }
    out.push_back(standard_from_perms("pairs", images));
  }
  return out;
}

std::vector<Irrep> dihedral_irreps(int m) {
  const int q = 2 * m;
  std::vector<Irrep> out;
  auto rot = [m](int a) { return a % m; };
  auto ref = [m](int a) { return a / m; };
  std::vector<Complex> triv(q, 1.0), sgn(q);
  for (int a = 0; a < q; ++a) sgn[a] = ref(a) ? -1.0 : 1.0;
  out.push_back(scalar_irrep("1", triv));
  out.push_back(scalar_irrep("refl", sgn));
  if (m % 2 == 0) {
    std::vector<Complex> alt(q), alt2(q);
    for (int a = 0; a < q; ++a) {
      alt[a] = rot(a) % 2 ? -1.0 : 1.0;
      alt2[a] = alt[a] * sgn[a];
    }
    out.push_back(scalar_irrep("alt", alt));
    out.push_back(scalar_irrep("alt*refl", alt2));
  }
  for (int h = 1; 2 * h < m; ++h) {
    Irrep r;
    r.label = "rot" + std::to_string(h);
    r.dim = 2;
    for (int a = 0; a < q; ++a) {
      double th = 2.0 * std::numbers::pi * h * rot(a) / m;
      Eigen::Matrix2d rm;
      rm << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
      if (ref(a)) s(1, 1) = -1.0;
      r.matrices.push_back((rm * s).cast<Complex>());
    }
    out.push_back(r);
  }
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// All irreps, trivial first, in the element indexing used by build_group.
std::vector<Irrep> full_irreps(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupSpec::Kind::Cyclic: return cyclic_irreps(spec.param);
    case GroupSpec::Kind::Symmetric: return symmetric_irreps(spec.param);
    case GroupSpec::Kind::Dihedral: return dihedral_irreps(spec.param);
    case GroupSpec::Kind::Table: throw Error(ErrorCode::RepsUnavailable, "table-loaded group needs an irrep file");
    case GroupSpec::Kind::Product: {
      std::vector<Irrep> acc = full_irreps(spec.factors.at(0));
      for (std::size_t f = 1; f < spec.factors.size(); ++f) {
        std::vector<Irrep> next = full_irreps(spec.factors[f]);
        const std::size_t qa = acc.front().matrices.size(), qb = next.front().matrices.size();
        std::vector<Irrep> merged;
        for (const auto& x : acc)
          for (const auto& y : next) {
            Irrep r;
            r.label = x.label == "1" ? y.label : (y.label == "1" ? x.label : x.label + "*" + y.label);
            if (x.label == "1" && y.label == "1") r.label = "1";
            r.dim = x.dim * y.dim;
            for (std::size_t a = 0; a < qa * qb; ++a) r.matrices.push_back(kron(x.matrices[a / qb], y.matrices[a % qb]));
            merged.push_back(std::move(r));
          }
        acc = std::move(merged);
      }
      return acc;
    }
  }
  throw Error(ErrorCode::RepsUnavailable, "unknown group kind");
}

}  // namespace

RepSet nontrivial_irreps(const GroupPtr& g) {
  if (!g->spec() || g->spec()->kind == GroupSpec::Kind::Table)
    throw Error(ErrorCode::RepsUnavailable, "no built-in irreps for '" + g->name() + "'; supply an irrep file");
  std::vector<Irrep> all = full_irreps(*g->spec());
  all.erase(all.begin());
  return RepSet(g, std::move(all));
}

RepSet nontrivial_irreps(const GroupPtr& g, const std::optional<std::string>& irrep_file) {
  if (irrep_file) return load_irreps_json(g, *irrep_file);
  return nontrivial_irreps(g);
}

RepSet irreps_from_json_text(const GroupPtr& g, const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationFailed, std::string("irrep file is not valid JSON: ") + e.what());
  }
  const json& list = doc.is_object() ? doc.at("irreps") : doc;
  if (!list.is_array()) throw Error(ErrorCode::ValidationFailed, "irrep file must hold a list of irreps");
  const int q = g->order();
  std::vector<Irrep> reps;
  try {
    for (const auto& item : list) {
      Irrep r;
      r.label = item.value("label", "rho" + std::to_string(reps.size()));
      r.dim = item.at("dim").get<int>();
      const auto& mats = item.at("matrices");
      if (static_cast<int>(mats.size()) != q)
        throw Error(ErrorCode::ValidationFailed, "irrep '" + r.label + "' lists " + std::to_string(mats.size()) +
                                                     " matrices, expected " + std::to_string(q));
      std::vector<CMatrix> by_label;
      for (const auto& m : mats) {
        CMatrix cm(r.dim, r.dim);
        // Either d rows of d [re, im] pairs or a flat row-major list of d*d pairs.
        std::vector<json> entries;
        if (m.size() == static_cast<std::size_t>(r.dim) && m[0].is_array() && m[0].size() == static_cast<std::size_t>(r.dim) &&
            m[0][0].is_array()) {
          for (const auto& row : m)
            for (const auto& e : row) entries.push_back(e);
        } else {
          for (const auto& e : m) entries.push_back(e);
        }
        if (entries.size() != static_cast<std::size_t>(r.dim) * r.dim)
          throw Error(ErrorCode::ValidationFailed, "irrep '" + r.label + "' has a matrix of the wrong size");
        for (int i = 0; i < r.dim; ++i)
          for (int j = 0; j < r.dim; ++j) {
            const json& e = entries[static_cast<std::size_t>(i) * r.dim + j];
            cm(i, j) = e.is_array() ? Complex(e.at(0).get<double>(), e.at(1).get<double>()) : Complex(e.get<double>(), 0.0);
          }
        by_label.push_back(cm);
      }
      for (int k = 0; k < q; ++k) r.matrices.push_back(by_label[g->original_label()[k]]);
      reps.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationFailed, std::string("malformed irrep entry: ") + e.what());
  }
  return RepSet(g, std::move(reps));
}

RepSet load_irreps_json(const GroupPtr& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open irrep file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return irreps_from_json_text(g, ss.str());
}

std::string irreps_to_json_text(const RepSet& reps) {
  using nlohmann::json;
  const FiniteGroup& g = reps.group();
  std::vector<int> internal(g.order());
  for (int k = 0; k < g.order(); ++k) internal[g.original_label()[k]] = k;
  json list = json::array();
  for (const auto& r : reps.irreps()) {
    json mats = json::array();
    for (int label = 0; label < g.order(); ++label) {
      const CMatrix& m = r.matrices[internal[label]];
      json rows = json::array();
      for (int i = 0; i < r.dim; ++i) {
        json row = json::array();
        for (int j = 0; j < r.dim; ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
      }
      mats.push_back(rows);
    }
    list.push_back({{"label", r.label}, {"dim", r.dim}, {"matrices", mats}});
  }
  return json{{"group", g.name()}, {"irreps", list}}.dump(1);
}

Irrep conjugate_irrep(const Irrep& rho) {
  Irrep out = rho;
  out.label = rho.label + "~";
  for (auto& m : out.matrices) m = m.conjugate();
  return out;
}

CMatrix fourier_coeff(std::span<const double> v, const Irrep& rho) {
  CMatrix x = CMatrix::Zero(rho.dim, rho.dim);
  for (std::size_t a = 0; a < v.size(); ++a)
    if (v[a] != 0.0) x += v[a] * rho.matrices[a];
  return x;
}

CMatrix fourier_row(std::span<const double> w, const Irrep& rho) { return fourier_coeff(w, rho); }

FourierVector fourier_transform(std::span<const double> v, const RepSet& reps) {
  FourierVector out;
  out.reserve(reps.size());
  for (const auto& r : reps.irreps()) out.push_back(fourier_coeff(v, r));
  return out;
}

double hs_norm(const CMatrix& m) { return m.norm(); }

double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double vtilde_norm_sq(const FourierVector& x, const RepSet& reps) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += reps[i].dim * x[i].squaredNorm();
  return s / reps.group().order();
}

CMatrix drift_matrix(const CMatrix& x, int n) {
  const double nn = n;
  CMatrix h = 0.5 * (x + x.adjoint());
  h.diagonal().array() -= (nn - 1.0) / nn;
  return h / (nn - 1.0);
}

namespace {

CMatrix h_of(const Irrep& rho, std::span<const double> mu) {
  CMatrix h = CMatrix::Zero(rho.dim, rho.dim);
  for (std::size_t a = 0; a < mu.size(); ++a)
    if (mu[a] != 0.0) h += mu[a] * 0.5 * (rho.matrices[a] + rho.matrices[a].adjoint());
  return h;
}

// Dense tableau simplex with Bland's rule: max c.x s.t. A x = b, x >= 0.
// `basis` must index a feasible starting basis with the tableau already in
// canonical form for it. Columns flagged in `blocked` never enter.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd a, Eigen::VectorXd b, std::vector<int> basis)
      : t_(a.rows(), a.cols() + 1), basis_(std::move(basis)) {
    t_.leftCols(a.cols()) = a;
    t_.col(a.cols()) = b;
  }

  // Returns false if unbounded.
  bool maximize(const Eigen::VectorXd& c, const std::vector<char>& blocked) {
    const Eigen::Index m = t_.rows(), nv = t_.cols() - 1;
    for (int iter = 0; iter < 10000; ++iter) {
      Eigen::VectorXd cb(m);
      for (Eigen::Index i = 0; i < m; ++i) cb(i) = c(basis_[i]);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < nv && enter < 0; ++j) {
        if (blocked[j]) continue;
        double reduced = cb.dot(t_.col(j)) - c(j);
        if (reduced < -1e-12) enter = j;
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        double aij = t_(i, enter);
        if (aij <= 1e-12) continue;
        double ratio = t_(i, nv) / aij;
        if (leave < 0 || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::NotConverged, "simplex iteration limit");
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i)
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    basis_[r] = static_cast<int>(c);
  }

  Eigen::VectorXd solution(Eigen::Index nv) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < nv) x(basis_[i]) = t_(static_cast<Eigen::Index>(i), t_.cols() - 1);
    return x;
  }

  const std::vector<int>& basis() const { return basis_; }
  Eigen::MatrixXd& table() { return t_; }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

// max w.mu over the polytope; returns the optimal vertex.
std::vector<double> lp_vertex(const FiniteGroup& g, const std::vector<Subgroup>& subs, double c,
                              const std::vector<double>& w) {
  const int q = g.order();
  const int m = static_cast<int>(subs.size());
  const int nv = q + m + 1;  // mu, slacks, artificial
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, nv);
  Eigen::VectorXd b(m + 1);
  std::vector<int> basis(m + 1);
  for (int h = 0; h < m; ++h) {
    for (int x = 0; x < q; ++x)
      if (subs[h].contains(static_cast<Element>(x))) a(h, x) = 1.0;
    a(h, q + h) = 1.0;
    b(h) = 1.0 - c;
    basis[h] = q + h;
  }
  for (int x = 0; x < q; ++x) a(m, x) = 1.0;
  a(m, nv - 1) = 1.0;
  b(m) = 1.0;
  basis[m] = nv - 1;
  Tableau tab(a, b, basis);
  std::vector<char> blocked(nv, 0);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(nv);
  phase1(nv - 1) = -1.0;
  tab.maximize(phase1, blocked);
  Eigen::VectorXd x1 = tab.solution(nv);
  if (x1(nv - 1) > 1e-10) throw Error(ErrorCode::ValidationFailed, "constraint polytope is empty for this c");
  // Drive a zero-level artificial out of the basis if it is still there.
  for (std::size_t i = 0; i < tab.basis().size(); ++i)
    if (tab.basis()[i] == nv - 1)
      for (int j = 0; j < nv - 1; ++j)
        if (std::abs(tab.table()(static_cast<Eigen::Index>(i), j)) > 1e-9) {
          tab.pivot(static_cast<Eigen::Index>(i), j);
          break;
        }
  blocked[nv - 1] = 1;
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(nv);
  for (int x = 0; x < q; ++x) obj(x) = w[x];
  if (!tab.maximize(obj, blocked)) throw Error(ErrorCode::NotConverged, "LP unbounded");
  Eigen::VectorXd x = tab.solution(nv);
  std::vector<double> mu(q);
  for (int k = 0; k < q; ++k) mu[k] = std::max(0.0, x(k));
  return mu;
}

GapCertificate vertex_enumeration(const FiniteGroup& g, const Irrep& rho, double c) {
  const int q = g.order();
  const auto& subs = g.proper_subgroups();
  const int m = static_cast<int>(subs.size());
  const int total = q + m;
  const int k = q - 1;
  GapCertificate best;
  best.certified = true;
  best.value = -2.0;
  std::set<std::vector<long long>> seen;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k == 0) {
    std::vector<double> mu{1.0};
    best.value = lambda_max_h(rho, mu);
    best.argmax = mu;
    best.vertices = 1;
    return best;
  }
  while (true) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
    for (int r = 0; r < k; ++r) {
      int con = idx[r];
      if (con < q) {
        a(r, con) = 1.0;
      } else {
        for (int x = 0; x < q; ++x)
          if (subs[con - q].contains(static_cast<Element>(x))) a(r, x) = 1.0;
        b(r) = 1.0 - c;
      }
    }
    a.row(k).setOnes();
    b(k) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() == q) {
      Eigen::VectorXd mu = lu.solve(b);
      bool ok = (mu.array() >= -1e-12).all();
      for (int h = 0; h < m && ok; ++h) {
        double s = 0.0;
        for (int x = 0; x < q; ++x)
          if (subs[h].contains(static_cast<Element>(x))) s += mu(x);
        ok = s <= 1.0 - c + 1e-12;
      }
      if (ok) {
        std::vector<long long> key(q);
        for (int x = 0; x < q; ++x) key[x] = std::llround(mu(x) * 1e9);
        if (seen.insert(key).second) {
          std::vector<double> v(mu.data(), mu.data() + q);
          for (double& e : v) e = std::max(0.0, e);
          double lam = lambda_max_h(rho, v);
          if (lam > best.value) {
            best.value = lam;
            best.argmax = v;
          }
        }
      }
    }
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == total - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int r = pos + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
  best.vertices = seen.size();
  return best;
}

GapCertificate ascent_search(const FiniteGroup& g, const Irrep& rho, double c, const GapOptions& opt) {
  const int q = g.order();
  const auto& subs = g.proper_subgroups();
  Rng rng(opt.seed, 0x6a7);
  GapCertificate best;
  best.value = -2.0;
  bool stalled = false;
  for (int s = 0; s < opt.starts; ++s) {
    std::vector<double> w(q);
    for (double& x : w) x = rng.uniform() - 0.5;
    if (s < q) {
      // Deterministic starts pushing mass onto each element in turn.
      std::fill(w.begin(), w.end(), 0.0);
      w[s] = 1.0;
    }
    std::vector<double> mu = lp_vertex(g, subs, c, w);
    double lam = lambda_max_h(rho, mu);
    int it = 0;
    for (; it < 500; ++it) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h_of(rho, mu));
      Eigen::VectorXcd v = es.eigenvectors().col(rho.dim - 1);
      std::vector<double> coef(q);
      for (int a = 0; a < q; ++a) coef[a] = (v.adjoint() * rho.matrices[a] * v)(0, 0).real();
      std::vector<double> next = lp_vertex(g, subs, c, coef);
      double lin = std::inner_product(coef.begin(), coef.end(), next.begin(), 0.0);
      if (lin <= lam + 1e-13) break;
      mu = std::move(next);
      lam = lambda_max_h(rho, mu);
      ++best.vertices;
    }
    if (it == 500) stalled = true;
    if (lam > best.value) {
      best.value = lam;
      best.argmax = mu;
    }
  }
  if (stalled)
    throw Error(ErrorCode::NotConverged, "ascent did not settle; best found " + std::to_string(best.value));
  return best;
}

}  // namespace

double lambda_max_h(const Irrep& rho, std::span<const double> mu) {
  CMatrix h = h_of(rho, mu);
  if (rho.dim == 1) return h(0, 0).real();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(rho.dim - 1);
}

GapCertificate gap_certificate(const FiniteGroup& g, const Irrep& rho, double c, const GapOptions& opt) {
  if (!(c > 0.0 && c < 1.0)) throw Error(ErrorCode::InvalidArgument, "c must lie in (0,1)");
  const bool exact = !opt.force_search && g.order() <= opt.max_exact_order &&
                     g.proper_subgroups().size() <= opt.max_exact_subgroups;
  return exact ? vertex_enumeration(g, rho, c) : ascent_search(g, rho, c, opt);
}

}  // namespace prmix

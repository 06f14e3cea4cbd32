#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prmix/group.hpp"

namespace prmix {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

struct Irrep {
  std::string label;
  int dim = 1;
  std::vector<CMatrix> matrices;  // indexed by internal element index

  const CMatrix& operator()(Element a) const { return matrices[a]; }
  Complex character(Element a) const { return matrices[a].trace(); }
};

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kCharacterTol = 1e-8;

// Throws ValidationFailed naming the identity that fails.
void validate_irrep(const FiniteGroup& g, const Irrep& rho);

class RepSet {
 public:
  // Validates each irrep, completeness and pairwise orthogonality.
  RepSet(GroupPtr group, std::vector<Irrep> irreps);

  const FiniteGroup& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const std::vector<Irrep>& irreps() const { return irreps_; }
  std::size_t size() const { return irreps_.size(); }
  const Irrep& operator[](std::size_t i) const { return irreps_[i]; }

 private:
  GroupPtr group_;
  std::vector<Irrep> irreps_;
};

// Built-in irreps: products of cyclic, symmetric (k <= 4) and dihedral
// factors. Table-loaded groups need an irrep file.
RepSet nontrivial_irreps(const GroupPtr& g);
RepSet nontrivial_irreps(const GroupPtr& g, const std::optional<std::string>& irrep_file);

// Matrices are listed per element in the group's original label order.
RepSet load_irreps_json(const GroupPtr& g, const std::string& path);
RepSet irreps_from_json_text(const GroupPtr& g, const std::string& text);
std::string irreps_to_json_text(const RepSet& reps);

Irrep conjugate_irrep(const Irrep& rho);

using FourierVector = std::vector<CMatrix>;

// Sum_a v(a) rho(a); v is indexed by element.
CMatrix fourier_coeff(std::span<const double> v, const Irrep& rho);
// Same sum over a row of a proportion matrix normalised to weights.
CMatrix fourier_row(std::span<const double> w, const Irrep& rho);
FourierVector fourier_transform(std::span<const double> v, const RepSet& reps);

double hs_norm(const CMatrix& m);
double op_norm(const CMatrix& m);
// (1/Q) sum_rho d_rho ||x_rho||_HS^2
double vtilde_norm_sq(const FourierVector& x, const RepSet& reps);

// (1/(n-1)) ((x + x*)/2 - (n-1)/n I)
CMatrix drift_matrix(const CMatrix& x, int n);

// Largest eigenvalue of sum_a mu(a) (rho(a) + rho(a)*)/2.
double lambda_max_h(const Irrep& rho, std::span<const double> mu);

struct GapCertificate {
  double value = 0.0;
  bool certified = false;   // exact vertex enumeration
  std::vector<double> argmax;
  std::size_t vertices = 0;  // vertices visited
};

struct GapOptions {
  int max_exact_order = 8;
  std::size_t max_exact_subgroups = 16;
  int starts = 48;
  std::uint64_t seed = 7;
  bool force_search = false;
};

// Maximum of lambda_max_h over {mu >= 0, sum mu = 1, mu(H) <= 1 - c for proper H}.
// Throws NotConverged from the search variant if an ascent does not settle.
GapCertificate gap_certificate(const FiniteGroup& g, const Irrep& rho, double c, const GapOptions& opt = {});

}  // namespace prmix

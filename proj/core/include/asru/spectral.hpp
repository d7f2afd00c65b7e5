#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "asru/hmm.hpp"

namespace asru {

inline constexpr double kEigTolerance = 1e-7;   // relative to spectral radius
inline constexpr double kProjTolerance = 1e-9;
inline constexpr double kRankTolerance = 1e-8;  // relative to sigma_max

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

SymmetricEigen symmetric_eigen(const Matrix& m);

enum class SpectrumMethod { ClosedForm, SymmetrizedNumeric };

struct SpectrumReport {
  // Real spectra fill `eigenvalues`; directed circulants also fill `complex_eigenvalues`.
  std::vector<double> eigenvalues;
  std::vector<std::complex<double>> complex_eigenvalues;
  bool real = true;
  int distinct_count = 0;
  int distinct_nonzero_count = 0;
  double min_gap = 0.0;
  SpectrumMethod method = SpectrumMethod::SymmetrizedNumeric;
};

// D^{1/2} T D^{-1/2} for a reversible chain; exactly symmetric on return.
Matrix symmetrize(const TransitionMatrix& t);

// Eigenvalues of one subgraph by closed form; complex for directed circulants.
std::vector<std::complex<double>> closed_form_spectrum(const GraphSpec& spec);

SpectrumReport spectrum_of_chain(const TransitionMatrix& t,
                                 const std::optional<GraphSpec>& graph = std::nullopt,
                                 double eig_tol = kEigTolerance);
SpectrumReport spectrum_of_chain(const MarkovChain& chain, double eig_tol = kEigTolerance);

// Distinct values of a spectrum: representatives and their multiplicities.
struct DistinctValues {
  std::vector<std::complex<double>> values;
  std::vector<int> multiplicity;
};
DistinctValues distinct_values(const std::vector<std::complex<double>>& values, double abs_tol);

struct DecipherabilityReport {
  std::optional<bool> assumption1_holds;
  std::optional<bool> assumption2_holds;
  std::optional<int> distinct_nonzero;
  std::optional<int> projected_eigenspaces;
  int rank_px = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::optional<double> lemma_bound;

  std::string to_json() const;
};

DecipherabilityReport check_decipherability(const HmmLanguage& lang, int blocks);

std::vector<double> singular_values(const Matrix& m);  // descending, Gram-eigen path
double sigma_min(const Matrix& px);
int numerical_rank(const Matrix& m, double rel_tol = kRankTolerance);

struct LemmaBound {
  double bound = 0.0;
  double delta_min = 0.0;
  double lambda_min = 0.0;
  double decay = 0.0;  // sqrt of sum_{l=0}^{L-|X|-1} lambda_min^{2l}
  double kappa = 0.0;
  double min_r_hat = 0.0;
  double sigma_min = 0.0;
};

LemmaBound lemma_sigma_bound(const HmmLanguage& lang, int blocks);

double theorem3_threshold(long long n_x, long long n_y, int blocks, int units_x, int units_y,
                          double delta);

}  // namespace asru

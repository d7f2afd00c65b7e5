#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asru/hmm.hpp"

namespace asru {

enum class Objective { Mmd, Jsd, Wasserstein };
enum class Averaging { SoftInput, OutsideCost };
enum class DiscriminatorKind { LinearPositional, PerStepMlp };

const char* to_string(Objective o);
const char* to_string(Averaging a);
const char* to_string(DiscriminatorKind k);
Objective parse_objective(const std::string& s);
Averaging parse_averaging(const std::string& s);
DiscriminatorKind parse_discriminator(const std::string& s);

struct Generator {
  Matrix logits;  // U, |X| x |Y|
  Matrix assignment() const;
};

Matrix softmax_rows(const Matrix& u);
Matrix softmax_jacobian(const Vector& probs);  // diag(p) - p p^T

// Decomposable scorer: D(P) = sum_l D_l(P_l).
struct Discriminator {
  DiscriminatorKind kind = DiscriminatorKind::LinearPositional;
  Matrix linear;               // L x |Y|
  std::vector<Matrix> hidden;  // per position, H x |Y|
  std::vector<Vector> output;  // per position, H

  int blocks() const;
  int units_y() const;
  double score(int l, const Vector& p) const;
  Vector input_gradient(int l, const Vector& p) const;  // grad_p D_l(p)
  Vector onehot_scores(int l) const;                    // D_l(e_y) for every y

  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& theta);
  void axpy(double alpha, const Discriminator& dir);
  void clip(double c);
  bool finite() const;
};

Discriminator zero_like(const Discriminator& d);
Discriminator make_discriminator(DiscriminatorKind kind, int blocks, int units_y, int hidden,
                                 Engine& rng);
// Linear: zeros. MLP: Xavier-scale Gaussian.
void reset_discriminator(Discriminator& d, Engine& rng);

struct ObjectiveTerms {
  Vector a;
  Vector b;
};
ObjectiveTerms objective_terms(Objective obj, const Vector& scores_real, const Vector& scores_fake);
double objective_a(Objective obj, double s);
double objective_b(Objective obj, double s);
double objective_da(Objective obj, double s);
double objective_db(Objective obj, double s);

Matrix generator_distribution(const Generator& gen, const Matrix& px);

// J with the discriminator as given; the generator minimizes J, or J^2 / |theta_D|^2 for MMD.
double gan_value(const Discriminator& disc, const Matrix& py, const Matrix& pg, Objective obj, Averaging avg);
double generator_loss(const Generator& gen, const Discriminator& disc, const PositionalUnigramPair& pair,
                      Objective obj, Averaging avg);

Matrix generator_gradient(const Generator& gen, const Discriminator& disc,
                          const PositionalUnigramPair& pair, Objective obj, Averaging avg);
Discriminator discriminator_gradient(const Discriminator& disc, const Generator& gen,
                                     const PositionalUnigramPair& pair, Objective obj, Averaging avg);

struct TrainConfig {
  Objective objective = Objective::Mmd;
  DiscriminatorKind discriminator = DiscriminatorKind::LinearPositional;
  Averaging averaging = Averaging::SoftInput;
  int epochs = 2000;
  int disc_steps = 1;
  bool reset_discriminator = true;
  double disc_lr = 1.0;
  double gen_lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double gen_init_std = 0.01;
  int mlp_hidden = 128;
  std::optional<double> weight_clip;
  int trace_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PerProbe {
  std::vector<int> true_labels;
  Vector weights;
};

struct TraceRow {
  int step = 0;
  double j = 0.0;
  double residual = 0.0;
  double per = -1.0;  // negative when no probe was given
};

struct TrainResult {
  Generator generator;
  Discriminator discriminator;
  std::vector<TraceRow> trace;
};

Generator initial_generator(int units_x, int units_y, const TrainConfig& cfg, Engine& rng);
TrainResult train(const PositionalUnigramPair& pair, const TrainConfig& cfg,
                  const std::optional<PerProbe>& probe = std::nullopt);

Vector project_to_simplex(const Vector& v);

struct ErmSolution {
  Matrix unprojected;
  Matrix projected;
  double residual_unprojected = 0.0;
  double residual_projected = 0.0;
  std::vector<int> decoded;
};

ErmSolution erm_least_squares(const PositionalUnigramPair& pair);

}  // namespace asru

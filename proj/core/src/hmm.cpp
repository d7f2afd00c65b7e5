#include "asru/hmm.hpp"

#include <cmath>

#include "asru/error.hpp"

namespace asru {

void HmmLanguage::validate() const {
  require(units_x >= 1 && units_y >= 1 && ngram >= 1, "alphabet sizes and N must be positive");
  long long s = 1;
  for (int i = 0; i < ngram; ++i) s *= units_x;
  require(chain.states() == s, "transition dimension must equal |X|^N");
  require(chain.initial.size() == s, "initial vector dimension must equal |X|^N");
  require(emission.rows() == units_x && emission.cols() == units_y, "emission must be |X| x |Y|");
  require(std::abs(chain.initial.sum() - 1.0) <= 1e-12 && chain.initial.minCoeff() >= 0.0,
          "initial vector is not a probability vector");
  require(row_sum_error(chain.transition.probs) <= 1e-12 && chain.transition.probs.minCoeff() >= 0.0,
          "transition matrix is not row-stochastic");
  require(row_sum_error(emission) <= 1e-12 && emission.minCoeff() >= 0.0,
          "emission matrix is not row-stochastic");
}

HmmLanguage make_language(MarkovChain chain, Matrix emission, int units_x, int ngram) {
  HmmLanguage lang;
  lang.chain = std::move(chain);
  lang.units_x = units_x;
  lang.units_y = static_cast<int>(emission.cols());
  lang.emission = std::move(emission);
  lang.ngram = ngram;
  lang.validate();
  return lang;
}

Vector random_initial_vector(int states, std::uint64_t seed) {
  require(states >= 1, "need at least one state");
  Engine rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(states);
  // 1 - U lies in (0, 1], so every entry is strictly positive
  for (int i = 0; i < states; ++i) v[i] = 1.0 - u(rng);
  return v / v.sum();
}

Matrix random_permutation_emission(int size, std::uint64_t seed) {
  require(size >= 1, "emission size must be positive");
  std::vector<int> p = random_permutation(size, seed);
  Matrix o = Matrix::Zero(size, size);
  for (int x = 0; x < size; ++x) o(x, p[x]) = 1.0;
  return o;
}

int state_digit(int state, int position, int units_x, int ngram) {
  for (int i = position + 1; i < ngram; ++i) state /= units_x;
  return state % units_x;
}

namespace {

Vector select_units(const Vector& state_dist, int units_x, int ngram, UnitSelection sel) {
  Vector out = Vector::Zero(units_x);
  const int s = static_cast<int>(state_dist.size());
  if (sel == UnitSelection::SelectedUnit) {
    for (int st = 0; st < s; ++st) out[st % units_x] += state_dist[st];
  } else {
    for (int st = 0; st < s; ++st)
      for (int p = 0; p < ngram; ++p) out[state_digit(st, p, units_x, ngram)] += state_dist[st];
    out /= ngram;
  }
  return out;
}

void check_corpus_shape(const std::vector<std::vector<int>>& seqs, std::size_t len, int alphabet,
                        const char* what) {
  for (const auto& q : seqs) {
    require(q.size() == len, std::string(what) + " sequences have inconsistent lengths");
    for (int u : q) require(u >= 0 && u < alphabet, std::string(what) + " unit id out of range");
  }
}

}  // namespace

PositionalUnigramPair exact_positional_unigrams(const HmmLanguage& lang, int blocks,
                                                UnitSelection sel) {
  require(blocks >= 1, "need L >= 1");
  PositionalUnigramPair pair;
  pair.px.resize(blocks, lang.units_x);
  // row vector times T, never a matrix power
  Eigen::RowVectorXd v = lang.chain.initial.transpose();
  for (int k = 0; k < blocks; ++k) {
    if (k > 0) v = v * lang.chain.transition.probs;
    pair.px.row(k) = select_units(v.transpose(), lang.units_x, lang.ngram, sel).transpose();
  }
  pair.py = pair.px * lang.emission;
  pair.exact = true;
  return pair;
}

namespace {

std::vector<int> sample_state_path(const Categorical& start, const std::vector<Categorical>& rows,
                                   int blocks, Engine& rng) {
  std::vector<int> path(blocks);
  path[0] = start(rng);
  for (int k = 1; k < blocks; ++k) path[k] = rows[path[k - 1]](rng);
  return path;
}

std::vector<int> expand(const std::vector<int>& path, int units_x, int ngram) {
  std::vector<int> units;
  units.reserve(path.size() * ngram);
  for (int st : path)
    for (int p = 0; p < ngram; ++p) units.push_back(state_digit(st, p, units_x, ngram));
  return units;
}

std::vector<int> emit(const std::vector<int>& units, const std::vector<Categorical>& emit_rows,
                      Engine& rng) {
  std::vector<int> out(units.size());
  for (std::size_t t = 0; t < units.size(); ++t) out[t] = emit_rows[units[t]](rng);
  return out;
}

}  // namespace

Corpus sample_corpus(const HmmLanguage& lang, int n_sequences, int blocks, bool matched,
                     std::uint64_t seed) {
  require(n_sequences >= 1, "need at least one sequence");
  require(blocks >= 1, "need L >= 1");
  const int s = lang.chain.states();
  Categorical start(lang.chain.initial);
  std::vector<Categorical> rows(s);
  for (int i = 0; i < s; ++i) rows[i] = Categorical(lang.chain.transition.probs.row(i).transpose());
  std::vector<Categorical> emit_rows(lang.units_x);
  for (int x = 0; x < lang.units_x; ++x) emit_rows[x] = Categorical(lang.emission.row(x).transpose());

  Corpus c;
  c.matched = matched;
  c.seed = seed;
  c.ngram = lang.ngram;
  c.blocks = blocks;
  c.units_x = lang.units_x;
  c.units_y = lang.units_y;
  c.speech.reserve(n_sequences);
  c.text.reserve(n_sequences);

  Engine speech_rng(seed);
  if (matched) {
    for (int i = 0; i < n_sequences; ++i) {
      auto units = expand(sample_state_path(start, rows, blocks, speech_rng), lang.units_x, lang.ngram);
      c.text.push_back(emit(units, emit_rows, speech_rng));
      c.speech.push_back(std::move(units));
    }
    return c;
  }
  Engine text_rng(seed + (std::uint64_t{1} << 31));
  for (int i = 0; i < n_sequences; ++i)
    c.speech.push_back(expand(sample_state_path(start, rows, blocks, speech_rng), lang.units_x, lang.ngram));
  for (int i = 0; i < n_sequences; ++i) {
    auto hidden = expand(sample_state_path(start, rows, blocks, text_rng), lang.units_x, lang.ngram);
    c.text.push_back(emit(hidden, emit_rows, text_rng));
  }
  return c;
}

PositionalUnigramPair empirical_positional_unigrams(const Corpus& corpus, UnitSelection sel) {
  require(!corpus.speech.empty() && !corpus.text.empty(), "corpus is empty");
  require(corpus.blocks >= 1 && corpus.ngram >= 1, "corpus shape is unset");
  const std::size_t len = static_cast<std::size_t>(corpus.blocks) * corpus.ngram;
  check_corpus_shape(corpus.speech, len, corpus.units_x, "speech");
  check_corpus_shape(corpus.text, len, corpus.units_y, "text");

  auto count = [&](const std::vector<std::vector<int>>& seqs, int alphabet) {
    Matrix m = Matrix::Zero(corpus.blocks, alphabet);
    for (const auto& q : seqs)
      for (int k = 0; k < corpus.blocks; ++k) {
        if (sel == UnitSelection::SelectedUnit) {
          m(k, q[static_cast<std::size_t>(k) * corpus.ngram + corpus.ngram - 1]) += 1.0;
        } else {
          for (int p = 0; p < corpus.ngram; ++p)
            m(k, q[static_cast<std::size_t>(k) * corpus.ngram + p]) += 1.0;
        }
      }
    double denom = static_cast<double>(seqs.size()) *
                   (sel == UnitSelection::SelectedUnit ? 1 : corpus.ngram);
    return Matrix(m / denom);
  };
  PositionalUnigramPair pair;
  pair.px = count(corpus.speech, corpus.units_x);
  pair.py = count(corpus.text, corpus.units_y);
  pair.exact = false;
  pair.n_x = static_cast<long long>(corpus.speech.size());
  pair.n_y = static_cast<long long>(corpus.text.size());
  return pair;
}

Vector speech_unit_frequencies(const Corpus& corpus) {
  Vector f = Vector::Zero(corpus.units_x);
  double total = 0.0;
  for (const auto& q : corpus.speech)
    for (int u : q) {
      f[u] += 1.0;
      total += 1.0;
    }
  require(total > 0.0, "corpus has no speech tokens");
  return f / total;
}

std::vector<int> emission_labels(const Matrix& emission) {
  std::vector<int> labels(emission.rows());
  for (Eigen::Index x = 0; x < emission.rows(); ++x) {
    Eigen::Index best = 0;
    for (Eigen::Index y = 1; y < emission.cols(); ++y)
      if (emission(x, y) > emission(x, best)) best = y;
    labels[x] = static_cast<int>(best);
  }
  return labels;
}

Vector stationary_distribution(const TransitionMatrix& t) {
  if (!t.balance)
    throw Error(ErrorCode::NonReversibleNoClosedForm, "stationary distribution needs balance weights");
  return *t.balance / t.balance->sum();
}

}  // namespace asru

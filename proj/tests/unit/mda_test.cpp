#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>

#include "../support/registers.hpp"
#include "regstyle/error.hpp"
#include "regstyle/linalg.hpp"
#include "regstyle/mda.hpp"

using namespace regstyle;
using namespace regstyle::mda;
using linalg::Matrix;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Usage;
}

std::size_t index_of(const FeatureCatalog& cat, const std::string& name) {
  const auto names = cat.names();
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

FeatureVector vec(std::vector<double> rates, std::string version = "test/1") {
  FeatureVector fv;
  fv.catalog_version = std::move(version);
  fv.rates = std::move(rates);
  fv.doc_words = 100;
  return fv;
}

// Deterministic pseudo-random doubles in [-1, 1).
struct Noise {
  std::uint64_t state;
  double operator()() {
    return static_cast<double>(testing_support::splitmix(state) >> 11) * 0x1.0p-52 - 1.0;
  }
};

std::vector<FeatureVector> random_corpus(std::size_t n, std::size_t m, std::uint64_t seed) {
  Noise noise{seed};
  std::vector<FeatureVector> corpus;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(m);
    // A few latent factors plus noise so the spectrum is not flat.
    const double f1 = noise(), f2 = noise(), f3 = noise();
    for (std::size_t j = 0; j < m; ++j) {
      r[j] = 50.0 + 10.0 * (f1 * std::sin(double(j)) + f2 * std::cos(0.5 * double(j)) + 0.3 * f3 * double(j % 3)) +
             3.0 * noise();
    }
    corpus.push_back(vec(std::move(r)));
  }
  return corpus;
}

double sample_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / double(x.size() - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Catalog and feature extraction

TEST(Catalog, BuiltinIsWellFormed) {
  const auto& cat = FeatureCatalog::builtin();
  EXPECT_EQ(32u, cat.size());
  EXPECT_FALSE(cat.version().empty());
  auto names = cat.names();
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names.end(), std::adjacent_find(names.begin(), names.end()));
}

TEST(Catalog, RejectsUnknownMatcher) {
  const char* bad = R"({"version": "x", "features": [{"name": "a", "matcher": "regex", "words": ["b"]}]})";
  EXPECT_EQ(ErrorCode::InvalidCatalog, code_of([&] { FeatureCatalog::parse(bad); }));
}

TEST(Catalog, RejectsDuplicateNames) {
  const char* bad = R"({"version": "x", "features": [
      {"name": "a", "matcher": "lexicon", "words": ["b"]},
      {"name": "a", "matcher": "lexicon", "words": ["c"]}]})";
  EXPECT_EQ(ErrorCode::InvalidCatalog, code_of([&] { FeatureCatalog::parse(bad); }));
}

TEST(Features, FirstPersonRate) {
  const auto& cat = FeatureCatalog::builtin();
  const FeatureVector fv = extract_features(text::Document("I think you know."), cat);
  ASSERT_EQ(cat.size(), fv.rates.size());
  EXPECT_EQ(4u, fv.doc_words);
  EXPECT_DOUBLE_EQ(250.0, fv.rates[index_of(cat, "first_person_pronouns")]);
  EXPECT_DOUBLE_EQ(250.0, fv.rates[index_of(cat, "second_person_pronouns")]);
  EXPECT_DOUBLE_EQ(0.0, fv.rates[index_of(cat, "nominalizations")]);
  EXPECT_DOUBLE_EQ(1.0, fv.rates[index_of(cat, "type_token_ratio")]);
  EXPECT_DOUBLE_EQ(3.25, fv.rates[index_of(cat, "mean_word_length")]);
}

TEST(Features, PunctuationPerToken) {
  const auto& cat = FeatureCatalog::builtin();
  const FeatureVector fv = extract_features(text::Document("Really? Yes!"), cat);
  EXPECT_DOUBLE_EQ(250.0, fv.rates[index_of(cat, "question_marks")]);
  EXPECT_DOUBLE_EQ(250.0, fv.rates[index_of(cat, "exclamation_marks")]);
}

TEST(Features, CurlyApostropheContraction) {
  const auto& cat = FeatureCatalog::builtin();
  const FeatureVector fv = extract_features(text::Document("I don’t care"), cat);
  EXPECT_NEAR(1000.0 / 3.0, fv.rates[index_of(cat, "contractions")], 1e-9);
}

TEST(Features, EmptyDocument) {
  EXPECT_EQ(ErrorCode::EmptyDocument,
            code_of([] { extract_features(text::Document(""), FeatureCatalog::builtin()); }));
  EXPECT_EQ(ErrorCode::EmptyDocument,
            code_of([] { extract_features(text::Document("?! 42"), FeatureCatalog::builtin()); }));
}

TEST(Features, RatesFiniteAndNonNegative) {
  const auto& cat = FeatureCatalog::builtin();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto fv = extract_features(
        text::Document(testing_support::register_text(s % 2 ? testing_support::Register::Involved
                                                             : testing_support::Register::Informational,
                                                      s)),
        cat);
    for (double r : fv.rates) {
      EXPECT_TRUE(std::isfinite(r));
      EXPECT_GE(r, 0.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver against Eigen

TEST(Jacobi, MatchesEigenOnRandomSymmetric) {
  Noise noise{42};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
    Matrix a(n, n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = noise();
        a(i, j) = a(j, i) = v;
        e(long(i), long(j)) = e(long(j), long(i)) = v;
      }
    }
    const auto ours = linalg::jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(e);
    for (std::size_t k = 0; k < n; ++k) {
      const long rk = long(n - 1 - k);  // Eigen sorts ascending
      EXPECT_NEAR(ref.eigenvalues()(rk), ours.values[k], 1e-9);
      // Eigenvectors agree up to sign (spectra of random matrices are simple).
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += ours.vectors(i, k) * ref.eigenvectors()(long(i), rk);
      EXPECT_NEAR(1.0, std::abs(d), 1e-8);
    }
  }
}

TEST(Jacobi, DiagonalInput) {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  a(2, 2) = 2.0;
  const auto eig = linalg::jacobi_eigen(a);
  EXPECT_EQ((std::vector<double>{3.0, 2.0, 1.0}), eig.values);
  EXPECT_EQ(0, eig.sweeps);
}

TEST(Varimax, IncreasesCriterionAndStaysOrthogonal) {
  Noise noise{7};
  Matrix l(8, 3);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 3; ++j) l(i, j) = noise();
  }
  Matrix rot;
  const Matrix rotated = linalg::varimax(l, &rot);
  EXPECT_GE(linalg::varimax_criterion(rotated) + 1e-12, linalg::varimax_criterion(l));
  const Matrix rtr = rot.transposed() * rot;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(i == j ? 1.0 : 0.0, rtr(i, j), 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Fitting

// Features 0-2 are exact affine copies of one signal, features 3-4 of a
// second signal uncorrelated with the first, so the correlation matrix is
// block diagonal with eigenvalues 3, 2, 0, 0, 0.
TEST(Fit, BlockCorrelationRecovered) {
  const double x[] = {1, 1, -1, -1, 2, -2, 0, 0};
  const double y[] = {1, -1, 1, -1, 0, 0, 2, -2};
  std::vector<FeatureVector> corpus;
  for (int i = 0; i < 8; ++i) {
    corpus.push_back(vec({10 + 2 * x[i], 5 + 0.5 * x[i], 1 + 3 * x[i], 7 + y[i], 20 + 4 * y[i]}));
  }
  MdaFitConfig cfg;
  cfg.dimensions = 2;
  const MdaModel m = fit_mda(corpus, cfg);
  ASSERT_EQ(2u, m.dimensions());
  EXPECT_NEAR(3.0, m.explained_variance[0], 1e-10);
  EXPECT_NEAR(2.0, m.explained_variance[1], 1e-10);
  EXPECT_NEAR(5.0, m.total_variance, 1e-10);
  const double a = 1.0 / std::sqrt(3.0), b = 1.0 / std::sqrt(2.0);
  const double expect[5][2] = {{a, 0}, {a, 0}, {a, 0}, {0, b}, {0, b}};
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(expect[r][c], m.loadings(std::size_t(r), std::size_t(c)), 1e-9);
  }

  // Independent check of the spectrum with Eigen on the same correlation.
  Eigen::MatrixXd z(8, 5);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 5; ++j) z(i, j) = (corpus[std::size_t(i)].rates[std::size_t(j)] - m.mean[std::size_t(j)]) / m.std[std::size_t(j)];
  }
  const Eigen::MatrixXd corr = z.transpose() * z / 7.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(corr);
  EXPECT_NEAR(ref.eigenvalues()(4), 3.0, 1e-9);
  EXPECT_NEAR(ref.eigenvalues()(3), 2.0, 1e-9);

  MdaFitConfig by_threshold;
  by_threshold.variance_threshold = 1.0;
  EXPECT_EQ(2u, fit_mda(corpus, by_threshold).dimensions());
}

TEST(Fit, ShapeOnThirtyFeatures) {
  auto corpus = random_corpus(90, 30, 3);
  for (auto& fv : corpus) fv.rates[7] = 4.0;  // constant feature gets dropped
  const MdaModel m = fit_mda(corpus);
  EXPECT_EQ((std::vector<std::size_t>{7}), m.dropped);
  EXPECT_EQ(29u, m.loadings.rows());
  EXPECT_EQ(6u, m.loadings.cols());
  ASSERT_EQ(6u, m.explained_variance.size());
  for (std::size_t d = 1; d < 6; ++d) EXPECT_GE(m.explained_variance[d - 1], m.explained_variance[d]);
  const Matrix gram = m.loadings.transposed() * m.loadings;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(i == j ? 1.0 : 0.0, gram(i, j), 1e-10);
  }
  for (std::size_t c = 0; c < 6; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < m.loadings.rows(); ++r) {
      if (std::abs(m.loadings(r, c)) > std::abs(m.loadings(best, c))) best = r;
    }
    EXPECT_GT(m.loadings(best, c), 0.0);
  }
}

TEST(Fit, ProjectedVarianceEqualsEigenvalue) {
  const auto corpus = random_corpus(120, 30, 11);
  const MdaModel m = fit_mda(corpus);
  for (std::size_t d = 0; d < m.dimensions(); ++d) {
    std::vector<double> scores;
    for (const auto& fv : corpus) scores.push_back(project(m, fv).scores[d]);
    EXPECT_NEAR(m.explained_variance[d], sample_variance(scores), 1e-6);
  }
}

TEST(Fit, VarimaxKeepsTotalVariance) {
  const auto corpus = random_corpus(120, 12, 5);
  MdaFitConfig plain, rotated;
  plain.dimensions = rotated.dimensions = 4;
  rotated.varimax = true;
  const MdaModel a = fit_mda(corpus, plain);
  const MdaModel b = fit_mda(corpus, rotated);
  EXPECT_TRUE(b.rotated);
  double sa = 0.0, sb = 0.0;
  for (std::size_t d = 0; d < 4; ++d) {
    sa += a.explained_variance[d];
    sb += b.explained_variance[d];
  }
  EXPECT_NEAR(sa, sb, 1e-9);
  for (std::size_t d = 1; d < 4; ++d) EXPECT_GE(b.explained_variance[d - 1], b.explained_variance[d]);
  // Rotated projections still carry the reported variance.
  for (std::size_t d = 0; d < 4; ++d) {
    std::vector<double> scores;
    for (const auto& fv : corpus) scores.push_back(project(b, fv).scores[d]);
    EXPECT_NEAR(b.explained_variance[d], sample_variance(scores), 1e-6);
  }
}

TEST(Fit, Errors) {
  EXPECT_EQ(ErrorCode::InsufficientCorpus, code_of([] {
              std::vector<FeatureVector> one = {vec({1, 2})};
              fit_mda(one);
            }));
  EXPECT_EQ(ErrorCode::DegenerateCorpus, code_of([] {
              std::vector<FeatureVector> same = {vec({1, 2}), vec({1, 2})};
              fit_mda(same);
            }));
  EXPECT_EQ(ErrorCode::CatalogMismatch, code_of([] {
              std::vector<FeatureVector> mixed = {vec({1, 2}), vec({2, 3}, "other/1")};
              fit_mda(mixed);
            }));
}

// ---------------------------------------------------------------------------
// Projection

TEST(Project, MeanMapsToOriginAndUnitShiftToColumnSums) {
  std::vector<FeatureVector> corpus = {vec({1, 5, 2}), vec({3, 4, 9}), vec({2, 8, 4}), vec({6, 1, 3})};
  MdaFitConfig cfg;
  cfg.dimensions = 3;
  const MdaModel m = fit_mda(corpus, cfg);
  for (double s : project(m, vec(m.mean)).scores) EXPECT_NEAR(0.0, s, 1e-12);
  std::vector<double> shifted(3);
  for (std::size_t j = 0; j < 3; ++j) shifted[j] = m.mean[j] + m.std[j];
  const auto e = project(m, vec(shifted));
  for (std::size_t d = 0; d < 3; ++d) {
    double col = 0.0;
    for (std::size_t r = 0; r < 3; ++r) col += m.loadings(r, d);
    EXPECT_NEAR(col, e.scores[d], 1e-12);
  }
}

TEST(Project, Affine) {
  const auto corpus = random_corpus(60, 30, 9);
  const MdaModel m = fit_mda(corpus);
  Noise noise{99};
  for (int t = 0; t < 50; ++t) {
    const auto& a = corpus[std::size_t(t)];
    const auto& b = corpus[std::size_t(t + 5)];
    const double alpha = noise();
    std::vector<double> mix(30);
    for (std::size_t j = 0; j < 30; ++j) mix[j] = alpha * a.rates[j] + (1 - alpha) * b.rates[j];
    const auto pm = project(m, vec(mix));
    const auto pa = project(m, a);
    const auto pb = project(m, b);
    for (std::size_t d = 0; d < m.dimensions(); ++d) {
      EXPECT_NEAR(alpha * pa.scores[d] + (1 - alpha) * pb.scores[d], pm.scores[d], 1e-9);
    }
  }
}

TEST(Project, CatalogMismatch) {
  const MdaModel m = fit_mda(random_corpus(10, 4, 1));
  EXPECT_EQ(ErrorCode::CatalogMismatch, code_of([&] { project(m, vec({1, 2, 3, 4}, "other/2")); }));
  EXPECT_EQ(ErrorCode::DimensionMismatch, code_of([&] { project(m, vec({1, 2, 3})); }));
}

TEST(Project, TwoRegisterSeparation) {
  using testing_support::Register;
  using testing_support::register_text;
  const auto& cat = FeatureCatalog::builtin();
  std::vector<FeatureVector> train;
  for (std::uint64_t s = 0; s < 40; ++s) {
    train.push_back(extract_features(text::Document(register_text(Register::Involved, s)), cat));
    train.push_back(extract_features(text::Document(register_text(Register::Informational, s)), cat));
  }
  const MdaModel m = fit_mda(train, {}, cat.names());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) (i % 2 ? mean_b : mean_a) += project(m, train[i]).scores[0];
  const double threshold = (mean_a + mean_b) / train.size();
  const bool a_high = mean_a > mean_b;
  int correct = 0;
  for (std::uint64_t s = 1000; s < 1050; ++s) {
    const double sa = project(m, extract_features(text::Document(register_text(Register::Involved, s)), cat)).scores[0];
    const double sb =
        project(m, extract_features(text::Document(register_text(Register::Informational, s)), cat)).scores[0];
    correct += ((sa > threshold) == a_high) + ((sb > threshold) != a_high);
  }
  EXPECT_GE(correct, 90);
}

// ---------------------------------------------------------------------------
// Away / Towards

TEST(AwayTowards, Examples) {
  const std::vector<double> x = {1.0, 0.0};
  const std::vector<double> in = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
  const std::vector<double> tgt = {0.0, 1.0};
  const auto at = away_towards(x, in, tgt);
  EXPECT_NEAR((1 - std::sqrt(2.0) / 2) / 2, at.away, 1e-12);
  EXPECT_NEAR(0.5, at.towards, 1e-12);

  const std::vector<double> neg = {-1.0, 0.0};
  const auto opposite = away_towards(x, neg, x);
  EXPECT_DOUBLE_EQ(1.0, opposite.away);
  EXPECT_DOUBLE_EQ(1.0, opposite.towards);

  const auto same = away_towards(in, in, in);
  EXPECT_NEAR(0.0, same.away, 1e-12);
  EXPECT_NEAR(1.0, same.towards, 1e-12);
}

TEST(AwayTowards, ScaleInvariantAndZeroVector) {
  const std::vector<double> r = {0.3, -1.2, 2.0}, i = {1.0, 0.5, -0.5}, t = {-0.2, 0.1, 0.9};
  const std::vector<double> r2 = {0.9, -3.6, 6.0}, i2 = {0.01, 0.005, -0.005};
  const auto a = away_towards(r, i, t);
  const auto b = away_towards(r2, i2, t);
  EXPECT_NEAR(a.away, b.away, 1e-12);
  EXPECT_NEAR(a.towards, b.towards, 1e-12);
  const std::vector<double> zero = {0, 0, 0};
  EXPECT_EQ(ErrorCode::ZeroVector, code_of([&] { away_towards(zero, i, t); }));
}

// ---------------------------------------------------------------------------
// Persistence

TEST(Persistence, RoundTripIsBitExact) {
  auto corpus = random_corpus(50, 30, 17);
  for (auto& fv : corpus) fv.rates[3] = 0.0;
  MdaFitConfig cfg;
  cfg.varimax = true;
  const MdaModel m = fit_mda(corpus, cfg);
  const auto path = std::filesystem::temp_directory_path() / "regstyle_mda_roundtrip.json";
  m.save(path);
  const MdaModel back = MdaModel::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(m.catalog_version, back.catalog_version);
  EXPECT_EQ(m.feature_names, back.feature_names);
  EXPECT_EQ(m.kept, back.kept);
  EXPECT_EQ(m.dropped, back.dropped);
  EXPECT_EQ(m.mean, back.mean);
  EXPECT_EQ(m.std, back.std);
  EXPECT_EQ(m.loadings, back.loadings);
  EXPECT_EQ(m.explained_variance, back.explained_variance);
  EXPECT_EQ(m.total_variance, back.total_variance);
  EXPECT_EQ(m.rotated, back.rotated);
  EXPECT_EQ(project(m, corpus[0]).scores, project(back, corpus[0]).scores);
}

TEST(Persistence, RejectsForeignFile) {
  EXPECT_EQ(ErrorCode::InvalidModel, code_of([] { MdaModel::from_json(R"({"format": "nope"})"); }));
  EXPECT_EQ(ErrorCode::InvalidModel, code_of([] { MdaModel::from_json("not json"); }));
}

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "regstyle/error.hpp"
#include "regstyle/mda.hpp"

namespace regstyle::mda {

using linalg::Matrix;
using nlohmann::json;

namespace {

// Largest-magnitude entry of each column is made positive (first on ties).
void fix_signs(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > std::abs(m(best, c))) best = r;
    }
    if (m.rows() > 0 && m(best, c) < 0.0) {
      for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = -m(r, c);
    }
  }
}

std::size_t choose_dimensions(const std::vector<double>& eigenvalues, double total,
                              const MdaFitConfig& config) {
  const std::size_t p = eigenvalues.size();
  if (!config.variance_threshold) {
    if (config.dimensions == 0) throw Error(ErrorCode::InvalidModel, "dimension count must be at least 1");
    return std::min(config.dimensions, p);
  }
  const double threshold = *config.variance_threshold;
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidModel, "variance threshold must lie in (0, 1]");
  }
  double cumulative = 0.0;
  for (std::size_t d = 0; d < p; ++d) {
    cumulative += std::max(eigenvalues[d], 0.0);
    // Relative slack absorbs rounding when the threshold is hit exactly.
    if (cumulative / total >= threshold - 1e-12) return d + 1;
  }
  return p;
}

}  // namespace

MdaModel fit_mda(std::span<const FeatureVector> corpus, const MdaFitConfig& config,
                 std::vector<std::string> feature_names) {
  if (corpus.size() < 2) {
    throw Error(ErrorCode::InsufficientCorpus,
                "need at least 2 feature vectors, got " + std::to_string(corpus.size()));
  }
  const std::size_t m = corpus.front().rates.size();
  const std::string& version = corpus.front().catalog_version;
  for (const auto& fv : corpus) {
    if (fv.catalog_version != version) {
      throw Error(ErrorCode::CatalogMismatch, "corpus mixes catalog versions '" + version + "' and '" +
                                                  fv.catalog_version + "'");
    }
    if (fv.rates.size() != m) throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    for (double r : fv.rates) {
      if (!std::isfinite(r)) throw Error(ErrorCode::InvalidModel, "non-finite feature rate in corpus");
    }
  }
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < m; ++j) feature_names.push_back("f" + std::to_string(j));
  }
  if (feature_names.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "feature name count does not match vector length");
  }

  const double n = static_cast<double>(corpus.size());
  MdaModel model;
  model.catalog_version = version;
  model.feature_names = std::move(feature_names);
  model.corpus_size = corpus.size();
  model.mean.assign(m, 0.0);
  model.std.assign(m, 0.0);
  for (const auto& fv : corpus) {
    for (std::size_t j = 0; j < m; ++j) model.mean[j] += fv.rates[j];
  }
  for (double& v : model.mean) v /= n;
  for (std::size_t j = 0; j < m; ++j) {
    double ss = 0.0;
    for (const auto& fv : corpus) {
      const double d = fv.rates[j] - model.mean[j];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd > 1e-12 * std::max(1.0, std::abs(model.mean[j]))) {
      model.std[j] = sd;
      model.kept.push_back(j);
    } else {
      model.dropped.push_back(j);
    }
  }
  if (model.kept.empty()) throw Error(ErrorCode::DegenerateCorpus, "every feature has zero variance");

  const std::size_t p = model.kept.size();
  Matrix z(corpus.size(), p);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      const std::size_t j = model.kept[k];
      z(i, k) = (corpus[i].rates[j] - model.mean[j]) / model.std[j];
    }
  }
  Matrix corr = z.transposed() * z;
  for (std::size_t a = 0; a < p; ++a) {
    corr(a, a) /= (n - 1.0);
    for (std::size_t b = a + 1; b < p; ++b) {
      const double s = 0.5 * (corr(a, b) + corr(b, a)) / (n - 1.0);
      corr(a, b) = s;
      corr(b, a) = s;
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < p; ++a) trace += corr(a, a);
  model.total_variance = trace;

  const linalg::SymmetricEigen eig = linalg::jacobi_eigen(corr, config.jacobi_tolerance);
  const std::size_t dims = choose_dimensions(eig.values, trace, config);

  Matrix loadings(p, dims);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < dims; ++c) loadings(r, c) = eig.vectors(r, c);
  }
  std::vector<double> variance(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(dims));

  if (config.varimax && dims > 1) {
    Matrix rotation;
    const Matrix rotated = linalg::varimax(loadings, &rotation);
    // Variance of each rotated score: sum_k rotation(k, c)^2 * eigenvalue_k.
    std::vector<double> rotated_variance(dims, 0.0);
    for (std::size_t c = 0; c < dims; ++c) {
      for (std::size_t k = 0; k < dims; ++k) rotated_variance[c] += rotation(k, c) * rotation(k, c) * variance[k];
    }
    std::vector<std::size_t> order(dims);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rotated_variance[a] > rotated_variance[b]; });
    for (std::size_t c = 0; c < dims; ++c) {
      variance[c] = rotated_variance[order[c]];
      for (std::size_t r = 0; r < p; ++r) loadings(r, c) = rotated(r, order[c]);
    }
    model.rotated = true;
  }
  fix_signs(loadings);
  model.loadings = std::move(loadings);
  model.explained_variance = std::move(variance);
  return model;
}

MdaEmbedding project(const MdaModel& model, const FeatureVector& fv) {
  if (fv.catalog_version != model.catalog_version) {
    throw Error(ErrorCode::CatalogMismatch, "vector from catalog '" + fv.catalog_version +
                                                "' projected with a model fitted on '" +
                                                model.catalog_version + "'");
  }
  if (fv.rates.size() != model.feature_names.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature vector length does not match the model");
  }
  MdaEmbedding e;
  e.scores.assign(model.dimensions(), 0.0);
  for (std::size_t k = 0; k < model.kept.size(); ++k) {
    const std::size_t j = model.kept[k];
    const double z = (fv.rates[j] - model.mean[j]) / model.std[j];
    for (std::size_t d = 0; d < model.dimensions(); ++d) e.scores[d] += model.loadings(k, d) * z;
  }
  return e;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different lengths");
  const double na = linalg::norm(a);
  const double nb = linalg::norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::ZeroVector, "cosine is undefined for a zero vector");
  return std::clamp(linalg::dot(a, b) / (na * nb), -1.0, 1.0);
}

AwayTowards away_towards(std::span<const double> rewritten, std::span<const double> input,
                         std::span<const double> target) {
  return {(1.0 - cosine(rewritten, input)) / 2.0, (1.0 + cosine(rewritten, target)) / 2.0};
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string MdaModel::to_json() const {
  json doc;
  doc["format"] = kFormat;
  doc["format_version"] = kFormatVersion;
  doc["catalog_version"] = catalog_version;
  doc["feature_names"] = feature_names;
  doc["kept"] = kept;
  doc["dropped"] = dropped;
  doc["dropped_features"] = json::array();
  for (std::size_t j : dropped) doc["dropped_features"].push_back(feature_names.at(j));
  doc["mean"] = mean;
  doc["std"] = std;
  json rows = json::array();
  for (std::size_t r = 0; r < loadings.rows(); ++r) {
    rows.push_back(std::vector<double>(loadings.row(r).begin(), loadings.row(r).end()));
  }
  doc["dimensions"] = dimensions();
  doc["loadings"] = std::move(rows);
  doc["explained_variance"] = explained_variance;
  doc["total_variance"] = total_variance;
  doc["rotated"] = rotated;
  doc["corpus_size"] = corpus_size;
  return doc.dump(2) + "\n";
}

MdaModel MdaModel::from_json(std::string_view text) {
  MdaModel m;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::InvalidModel, "not an MDA model file");
    }
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::InvalidModel, "unsupported model format version");
    }
    m.catalog_version = doc.at("catalog_version").get<std::string>();
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.kept = doc.at("kept").get<std::vector<std::size_t>>();
    m.dropped = doc.at("dropped").get<std::vector<std::size_t>>();
    m.mean = doc.at("mean").get<std::vector<double>>();
    m.std = doc.at("std").get<std::vector<double>>();
    const auto dims = doc.at("dimensions").get<std::size_t>();
    const auto& rows = doc.at("loadings");
    m.loadings = Matrix(rows.size(), dims);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto row = rows.at(r).get<std::vector<double>>();
      if (row.size() != dims) throw Error(ErrorCode::InvalidModel, "ragged loadings matrix");
      for (std::size_t c = 0; c < dims; ++c) m.loadings(r, c) = row[c];
    }
    m.explained_variance = doc.at("explained_variance").get<std::vector<double>>();
    m.total_variance = doc.at("total_variance").get<double>();
    m.rotated = doc.at("rotated").get<bool>();
    m.corpus_size = doc.value("corpus_size", std::size_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("malformed model file: ") + e.what());
  }
  const std::size_t f = m.feature_names.size();
  if (m.mean.size() != f || m.std.size() != f || m.loadings.rows() != m.kept.size() ||
      m.kept.size() + m.dropped.size() != f || m.explained_variance.size() != m.dimensions()) {
    throw Error(ErrorCode::InvalidModel, "inconsistent model dimensions");
  }
  for (std::size_t j : m.kept) {
    if (j >= f || !(m.std[j] > 0.0)) throw Error(ErrorCode::InvalidModel, "kept feature with invalid std");
  }
  return m;
}

void MdaModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write model " + path.string());
  out << to_json();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing model " + path.string());
}

MdaModel MdaModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace regstyle::mda

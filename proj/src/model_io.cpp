// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rome/csv.hpp"

namespace rome::model_io {

using estimators::Clustering;
using estimators::Downstream;
using estimators::FitConfig;
using estimators::RomeModel;
using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const Index r = static_cast<Index>(rows.size());
  if (r == 0) return Matrix(0, 0);
  const Index c = static_cast<Index>(rows.at(0).size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != c) throw DataError("ragged matrix");
    for (Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j));
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = arr.at(static_cast<std::size_t>(i));
  return v;
}

json config_to_json_obj(const FitConfig& c) {
  return json{{"clustering", estimators::clustering_name(c.clustering)},
              {"decorrelate", c.decorrelate},
              {"normalize", c.normalize},
              {"downstream", estimators::downstream_name(c.downstream)},
              {"sigma_min_factor", c.sigma_min_factor},
              {"k_min", c.k_min},
              {"k_max", c.k_max},
              {"alpha_k", c.alpha_k}};
}

FitConfig config_from_json_obj(const json& j) {
  FitConfig c;
  if (j.contains("clustering")) {
    c.clustering = estimators::clustering_by_name(j.at("clustering"));
  }
  c.decorrelate = j.value("decorrelate", c.decorrelate);
  c.normalize = j.value("normalize", c.normalize);
  if (j.contains("downstream")) {
    c.downstream = estimators::downstream_by_name(j.at("downstream"));
  }
  c.sigma_min_factor = j.value("sigma_min_factor", c.sigma_min_factor);
  c.k_min = j.value("k_min", c.k_min);
  c.k_max = j.value("k_max", c.k_max);
  c.alpha_k = j.value("alpha_k", c.alpha_k);
  return c;
}

}  // namespace

std::string fit_config_to_json(const FitConfig& config) {
  return config_to_json_obj(config).dump(2);
}

FitConfig fit_config_from_json(const std::string& json_text) {
  try {
    return config_from_json_obj(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config json: ") + e.what());
  }
}

std::string model_to_json(const RomeModel& model) {
  json doc;
  doc["config"] = config_to_json_obj(model.config);
  doc["dims"] = model.dims;
  doc["n_train"] = model.n_train;
  json comps = json::array();
  for (const auto& comp : model.components) {
    json c;
    c["weight"] = comp.weight;
    c["is_noise"] = comp.is_noise;
    c["mean"] = vector_to_json(comp.transform.mean.transpose());
    c["rotation"] = matrix_to_json(comp.transform.rotation);
    c["scales"] = vector_to_json(comp.transform.scales);
    if (const auto* kde = std::get_if<estimators::KdeComponent>(&comp.model)) {
      c["kind"] = "kde";
      c["bandwidth"] = kde->bandwidth;
      c["centers"] = matrix_to_json(kde->centers);
    } else if (const auto* gmm =
                   std::get_if<estimators::GmmComponent>(&comp.model)) {
      c["kind"] = "gmm";
      c["gmm_mean"] = vector_to_json(gmm->mean.transpose());
      c["covariance"] = matrix_to_json(gmm->covariance);
    } else {
      const auto& knn = std::get<estimators::KnnComponent>(comp.model);
      c["kind"] = "knn";
      c["k"] = knn.k;
      c["points"] = matrix_to_json(knn.points);
    }
    comps.push_back(std::move(c));
  }
  doc["components"] = std::move(comps);
  return doc.dump(2);
}

RomeModel model_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model json: ") + e.what());
  }
  RomeModel model;
  model.config = config_from_json_obj(doc.at("config"));
  model.dims = doc.at("dims");
  model.n_train = doc.at("n_train");
  for (const auto& c : doc.at("components")) {
    estimators::Component comp;
    comp.weight = c.at("weight");
    comp.is_noise = c.at("is_noise");
    comp.transform.mean = vector_from_json(c.at("mean")).transpose();
    comp.transform.rotation = matrix_from_json(c.at("rotation"));
    comp.transform.scales = vector_from_json(c.at("scales"));
    comp.transform.forward = comp.transform.rotation.transpose() *
                             comp.transform.scales.cwiseInverse().asDiagonal();
    comp.transform.log_abs_det =
        -comp.transform.scales.array().log().sum();
    const std::string kind = c.at("kind");
    if (kind == "kde") {
      comp.model = estimators::KdeComponent{matrix_from_json(c.at("centers")),
                                            c.at("bandwidth")};
    } else if (kind == "gmm") {
      comp.model = estimators::make_gmm_component(
          vector_from_json(c.at("gmm_mean")).transpose(),
          matrix_from_json(c.at("covariance")));
    } else if (kind == "knn") {
      comp.model =
          estimators::KnnComponent{matrix_from_json(c.at("points")), c.at("k")};
    } else {
      throw DataError("unknown component kind: " + kind);
    }
    model.components.push_back(std::move(comp));
  }
  return model;
}

void save_model(const std::string& path, const RomeModel& model) {
  csv::atomic_write_text(path, model_to_json(model) + "\n");
}

RomeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace rome::model_io

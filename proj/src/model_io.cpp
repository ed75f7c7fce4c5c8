#include "bdfl/model_io.hpp"

#include <fstream>
#include <sstream>

namespace bdfl {

namespace {

RMatrix real_matrix(const nlohmann::json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    std::ostringstream os;
    os << what << ": expected " << rows << " rows";
    throw Error(os.str());
  }
  RMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      std::ostringstream os;
      os << what << ": row " << r << " must have " << cols << " entries";
      throw Error(os.str());
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::json real_matrix_to_json(const RMatrix& m) {
  auto out = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

CMatrix complex_matrix_from_json(const nlohmann::json& j, Index rows, Index cols, const char* what) {
  if (!j.is_object() || !j.contains("re")) {
    std::ostringstream os;
    os << what << ": expected an object with \"re\" (and optional \"im\")";
    throw Error(os.str());
  }
  const RMatrix re = real_matrix(j.at("re"), rows, cols, what);
  const RMatrix im = j.contains("im") ? real_matrix(j.at("im"), rows, cols, what) : RMatrix::Zero(rows, cols);
  CMatrix m(rows, cols);
  m.real() = re;
  m.imag() = im;
  return m;
}

nlohmann::json complex_matrix_to_json(const CMatrix& m) {
  return {{"re", real_matrix_to_json(m.real())}, {"im", real_matrix_to_json(m.imag())}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  try {
    ModelSpec model;
    model.d = j.at("d").get<int>();
    if (model.d < 1) throw Error("model: d must be >= 1");
    const Index d = model.d;
    model.h = complex_matrix_from_json(j.at("h"), d, d, "model.h");
    const auto& w = j.at("w");
    if (w.is_object() && w.contains("preset")) {
      const auto preset = w.at("preset").get<std::string>();
      if (preset == "rank_one_pair") {
        model.w = ModelSpec::rank_one_pair(model.d, w.at("g").get<double>());
      } else if (preset == "density_density") {
        model.w = ModelSpec::density_density(real_matrix(w.at("g"), d, d, "model.w.g"));
      } else {
        throw Error("model.w: unknown preset '" + preset + "'");
      }
    } else {
      model.w = complex_matrix_from_json(w, d * d, d * d, "model.w");
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model JSON: ") + e.what());
  }
}

nlohmann::json model_to_json(const ModelSpec& model) {
  return {{"d", model.d}, {"h", complex_matrix_to_json(model.h)}, {"w", complex_matrix_to_json(model.w)}};
}

void ClassicalModel::validate() const {
  if (m < 1) throw Error("classical model: m must be >= 1");
  if (V.size() != m) throw Error("classical model: V must have m entries");
  if (w.rows() != m || w.cols() != m) throw Error("classical model: w must be m x m");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > kExactTol * std::max(1.0, w.cwiseAbs().maxCoeff()))
    throw Error("classical model: w must be symmetric");
}

ClassicalModel classical_model_from_json(const nlohmann::json& j) {
  try {
    ClassicalModel model;
    model.m = j.at("m").get<int>();
    if (model.m < 1) throw Error("classical model: m must be >= 1");
    const auto v = j.at("V").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != model.m) throw Error("classical model: V must have m entries");
    model.V = Eigen::Map<const RVector>(v.data(), model.m);
    model.w = real_matrix(j.at("w"), model.m, model.m, "classical model.w");
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("classical model JSON: ") + e.what());
  }
}

nlohmann::json classical_model_to_json(const ClassicalModel& model) {
  std::vector<double> v(model.V.data(), model.V.data() + model.V.size());
  return {{"m", model.m}, {"V", v}, {"w", real_matrix_to_json(model.w)}};
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path + "': " + e.what());
  }
}

}  // namespace bdfl

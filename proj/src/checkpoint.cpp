#include "hee/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hee/error.hpp"

namespace hee {

using nlohmann::json;

std::string checkpoint_to_json(const ModelSpec& spec, const Params& params) {
  json doc;
  doc["version"] = 1;
  json families = json::array();
  for (Family f : spec.families) families.push_back(std::string(to_string(f)));
  doc["spec"] = {{"L", spec.depth()},
                 {"sizes", spec.sizes},
                 {"families", families},
                 {"activation", std::string(to_string(spec.activation))}};
  doc["eta_top"] = std::vector<double>(params.eta_top.data(),
                                       params.eta_top.data() + params.eta_top.size());
  json theta = json::array();
  for (const MatrixXd& t : params.theta) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(t.size()));
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) flat.push_back(t(i, j));
    }
    theta.push_back(flat);
  }
  doc["theta"] = theta;
  return doc.dump(1) + "\n";
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + key, "missing");
  return obj.at(key);
}

}  // namespace

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint", e.what());
  }
  try {
    if (require(doc, "version", "").get<int>() != 1) {
      throw ConfigError("version", "unsupported checkpoint version");
    }
    const json& s = require(doc, "spec", "");
    Checkpoint cp;
    cp.spec.sizes = require(s, "sizes", "spec.").get<std::vector<int>>();
    for (const auto& name : require(s, "families", "spec.").get<std::vector<std::string>>()) {
      cp.spec.families.push_back(parse_family(name));
    }
    cp.spec.activation = parse_activation(require(s, "activation", "spec.").get<std::string>());
    cp.spec.validate();
    if (require(s, "L", "spec.").get<int>() != cp.spec.depth()) {
      throw ConfigError("spec.L", "does not match spec.sizes");
    }

    cp.params = Params::zeros(cp.spec);
    const auto eta = require(doc, "eta_top", "").get<std::vector<double>>();
    if (static_cast<int>(eta.size()) != cp.spec.sizes.back()) {
      throw ConfigError("eta_top", "wrong length");
    }
    cp.params.eta_top = Eigen::Map<const VectorXd>(eta.data(), static_cast<Eigen::Index>(eta.size()));

    const json& theta = require(doc, "theta", "");
    if (!theta.is_array() || static_cast<int>(theta.size()) != cp.spec.depth()) {
      throw ConfigError("theta", "expected one matrix per latent layer");
    }
    for (int l = 0; l < cp.spec.depth(); ++l) {
      const auto flat = theta[l].get<std::vector<double>>();
      MatrixXd& t = cp.params.theta[l];
      if (static_cast<Eigen::Index>(flat.size()) != t.size()) {
        throw ConfigError("theta", "matrix " + std::to_string(l) + " has the wrong size");
      }
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = flat[i * t.cols() + j];
      }
    }
    cp.params.validate(cp.spec);
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  }
}

void save_checkpoint(const std::string& path, const ModelSpec& spec, const Params& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << checkpoint_to_json(spec, params);
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace hee

#include "mctm/model_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace mctm {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) throw InputError(where + ": missing key '" + std::string(k) + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw InputError(where + ": unknown key '" + item.key() + "'");
  }
}

json support_json(const Support& s) { return json::array({s.lo(), s.hi()}); }

Support support_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw InputError(where + ": support must be [lo, hi]");
  return Support(j[0].get<double>(), j[1].get<double>());
}

json covariate_json(const CovariateBasis& b) {
  switch (b.kind()) {
    case CovariateBasis::Kind::Intercept: return {{"kind", "intercept"}};
    case CovariateBasis::Kind::Linear: return {{"kind", "linear"}, {"columns", b.columns()}};
    case CovariateBasis::Kind::Bernstein:
      return {{"kind", "bernstein"},
              {"column", b.columns().at(0)},
              {"order", b.bernstein_basis().order()},
              {"support", support_json(b.bernstein_basis().support())}};
  }
  return {};
}

CovariateBasis covariate_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind")) throw InputError(where + ": missing key 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "intercept") {
    require_keys(j, where, {"kind"});
    return CovariateBasis::intercept();
  }
  if (kind == "linear") {
    require_keys(j, where, {"kind", "columns"});
    return CovariateBasis::linear(j.at("columns").get<std::vector<int>>());
  }
  if (kind == "bernstein") {
    require_keys(j, where, {"kind", "column", "order", "support"});
    return CovariateBasis::bernstein(j.at("column").get<int>(), j.at("order").get<int>(),
                                     support_from(j.at("support"), where));
  }
  throw InputError(where + ": unknown covariate basis kind '" + kind + "'");
}

json margin_json(const ConditionalBasis& cb) {
  json j = {{"order", cb.response_basis().order()}, {"support", support_json(cb.response_basis().support())}};
  switch (cb.kind()) {
    case ConditionalBasis::Kind::Unconditional: j["kind"] = "unconditional"; break;
    case ConditionalBasis::Kind::AdditiveShift:
      j["kind"] = "shift";
      j["columns"] = cb.shift_columns();
      break;
    case ConditionalBasis::Kind::ResponseVarying:
      j["kind"] = "varying";
      j["covariates"] = covariate_json(cb.covariate_basis());
      break;
  }
  return j;
}

ConditionalBasis margin_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind")) throw InputError(where + ": missing key 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const auto response = [&] {
    return BernsteinBasis(j.at("order").get<int>(), support_from(j.at("support"), where));
  };
  if (kind == "unconditional") {
    require_keys(j, where, {"kind", "order", "support"});
    return ConditionalBasis::unconditional(response());
  }
  if (kind == "shift") {
    require_keys(j, where, {"kind", "order", "support", "columns"});
    return ConditionalBasis::additive_shift(response(), j.at("columns").get<std::vector<int>>());
  }
  if (kind == "varying") {
    require_keys(j, where, {"kind", "order", "support", "covariates"});
    return ConditionalBasis::response_varying(response(), covariate_from(j.at("covariates"), where + ".covariates"));
  }
  throw InputError(where + ": unknown margin kind '" + kind + "'");
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of numbers");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

DataFingerprint fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto add_column = [&](const std::string& name, const RowMatrix& m, Eigen::Index c) {
    h = fnv1a(h, name.data(), name.size() + 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, c);
      h = fnv1a(h, &v, sizeof v);
    }
  };
  for (int j = 0; j < data.dim(); ++j) add_column(data.response_names[static_cast<std::size_t>(j)], data.Y, j);
  for (int c = 0; c < data.covariates(); ++c) add_column(data.covariate_names[static_cast<std::size_t>(c)], data.X, c);
  std::ostringstream hex;
  hex << std::hex << h;
  return {data.n(), data.dim(), data.covariates(), hex.str()};
}

ModelDocument make_document(const FittedModel& model, const Dataset& data) {
  ModelDocument doc{model, data.response_names, data.covariate_names, {}, {}, {}, fingerprint(data)};
  doc.covariate_min = data.X.colwise().minCoeff().transpose();
  doc.covariate_max = data.X.colwise().maxCoeff().transpose();
  doc.covariate_mean = data.X.colwise().mean().transpose();
  if (data.covariates() == 0) doc.covariate_min = doc.covariate_max = doc.covariate_mean = Vector();
  return doc;
}

std::string serialize(const ModelDocument& doc) {
  const FittedModel& m = doc.model;
  json spec = {{"reference", m.spec.reference().name()}, {"margins", json::array()}, {"lambda", json::array()}};
  for (const auto& cb : m.spec.margins()) spec["margins"].push_back(margin_json(cb));
  for (const auto& t : m.spec.lambda_terms()) {
    spec["lambda"].push_back(
        {{"row", t.row}, {"col", t.col}, {"fixed_zero", t.fixed_zero}, {"basis", covariate_json(t.basis)}});
  }
  const ParamLayout layout(m.spec);
  json labels = json::array();
  for (int i = 0; i < layout.size(); ++i) labels.push_back(layout.label(i));
  json vcov = nullptr;
  if (m.vcov.size() > 0) {
    vcov = json::array();
    for (Eigen::Index r = 0; r < m.vcov.rows(); ++r) vcov.push_back(vector_json(m.vcov.row(r).transpose()));
  }
  const FitDiagnostics& d = m.diagnostics;
  json progress = json::array();
  for (const auto& [s, e] : d.outer_progress) progress.push_back({s, e});
  json diag = {{"converged", d.converged},
               {"outer_iterations", d.outer_iterations},
               {"inner_iterations", d.inner_iterations},
               {"lagrangian_gradient", d.lagrangian_gradient},
               {"max_violation", d.max_violation},
               {"min_slack", d.min_slack},
               {"active_constraints", d.active_constraints},
               {"outer_progress", progress},
               {"warnings", d.warnings},
               {"message", d.message}};
  json out = {{"schema", "mctm-model"},
              {"version", kModelSchemaVersion},
              {"spec", spec},
              {"response_names", doc.response_names},
              {"covariate_names", doc.covariate_names},
              {"covariate_min", vector_json(doc.covariate_min)},
              {"covariate_max", vector_json(doc.covariate_max)},
              {"covariate_mean", vector_json(doc.covariate_mean)},
              {"labels", labels},
              {"theta", vector_json(m.theta)},
              {"vcov", vcov},
              {"loglik", m.loglik},
              {"log_constant", m.log_constant},
              {"n_obs", m.n_obs},
              {"diagnostics", diag},
              {"data", {{"rows", doc.data.rows},
                        {"responses", doc.data.responses},
                        {"covariates", doc.data.covariates},
                        {"hash", doc.data.hash}}}};
  return out.dump(2) + "\n";
}

ModelDocument parse_model_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("schema", "") != "mctm-model") throw InputError("not an mctm model document");
    if (j.value("version", -1) != kModelSchemaVersion) {
      throw InputError("unsupported model schema version " + j.value("version", json(nullptr)).dump());
    }
    require_keys(j, "model",
                 {"schema", "version", "spec", "response_names", "covariate_names", "covariate_min", "covariate_max",
                  "covariate_mean", "labels", "theta", "vcov", "loglik", "log_constant", "n_obs", "diagnostics",
                  "data"});
    const json& js = j.at("spec");
    require_keys(js, "spec", {"reference", "margins", "lambda"});
    std::vector<ConditionalBasis> margins;
    for (std::size_t i = 0; i < js.at("margins").size(); ++i) {
      margins.push_back(margin_from(js.at("margins")[i], "spec.margins[" + std::to_string(i) + "]"));
    }
    std::vector<LambdaTerm> terms;
    for (std::size_t i = 0; i < js.at("lambda").size(); ++i) {
      const json& t = js.at("lambda")[i];
      const std::string where = "spec.lambda[" + std::to_string(i) + "]";
      require_keys(t, where, {"row", "col", "fixed_zero", "basis"});
      terms.push_back({t.at("row").get<int>(), t.at("col").get<int>(), covariate_from(t.at("basis"), where + ".basis"),
                       t.at("fixed_zero").get<bool>()});
    }
    ModelSpec spec(ReferenceDistribution::parse(js.at("reference").get<std::string>()), std::move(margins),
                   std::move(terms));
    FittedModel m = model_at(spec, vector_from(j.at("theta"), "theta"));
    if (!j.at("vcov").is_null()) {
      const json& v = j.at("vcov");
      const auto p = static_cast<Eigen::Index>(m.theta.size());
      if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != p) throw InputError("vcov has the wrong shape");
      m.vcov.resize(p, p);
      for (Eigen::Index r = 0; r < p; ++r) {
        const Vector row = vector_from(v[static_cast<std::size_t>(r)], "vcov");
        if (row.size() != p) throw InputError("vcov has the wrong shape");
        m.vcov.row(r) = row.transpose();
      }
    }
    m.loglik = j.at("loglik").get<double>();
    m.log_constant = j.at("log_constant").get<double>();
    m.n_obs = j.at("n_obs").get<int>();
    const json& jd = j.at("diagnostics");
    require_keys(jd, "diagnostics",
                 {"converged", "outer_iterations", "inner_iterations", "lagrangian_gradient", "max_violation",
                  "min_slack", "active_constraints", "outer_progress", "warnings", "message"});
    FitDiagnostics& d = m.diagnostics;
    d.converged = jd.at("converged").get<bool>();
    d.outer_iterations = jd.at("outer_iterations").get<int>();
    d.inner_iterations = jd.at("inner_iterations").get<int>();
    d.lagrangian_gradient = jd.at("lagrangian_gradient").get<double>();
    d.max_violation = jd.at("max_violation").get<double>();
    d.min_slack = jd.at("min_slack").is_null() ? 0.0 : jd.at("min_slack").get<double>();
    d.active_constraints = jd.at("active_constraints").get<std::vector<std::string>>();
    for (const auto& pe : jd.at("outer_progress")) d.outer_progress.emplace_back(pe.at(0).get<double>(), pe.at(1).get<double>());
    d.warnings = jd.at("warnings").get<std::vector<std::string>>();
    d.message = jd.at("message").get<std::string>();

    ModelDocument doc{std::move(m), j.at("response_names").get<std::vector<std::string>>(),
                      j.at("covariate_names").get<std::vector<std::string>>(),
                      vector_from(j.at("covariate_min"), "covariate_min"),
                      vector_from(j.at("covariate_max"), "covariate_max"),
                      vector_from(j.at("covariate_mean"), "covariate_mean"), {}};
    const json& jdata = j.at("data");
    require_keys(jdata, "data", {"rows", "responses", "covariates", "hash"});
    doc.data = {jdata.at("rows").get<int>(), jdata.at("responses").get<int>(), jdata.at("covariates").get<int>(),
                jdata.at("hash").get<std::string>()};
    if (static_cast<int>(doc.response_names.size()) != doc.model.spec.dim()) {
      throw InputError("response_names does not match the model dimension");
    }
    return doc;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw InputError(std::string("invalid model in document: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << serialize(doc);
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_document(ss.str());
}

}  // namespace mctm

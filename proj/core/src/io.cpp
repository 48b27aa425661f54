#include "qls/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "qls/errors.hpp"

namespace qls {

namespace {

using nlohmann::json;

json complex_to_json(Cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

double number_from_json(const json& j, const std::string& where) {
  if (!j.is_number()) throw StructureError(where + ": expected a number");
  return j.get<double>();
}

Cplx complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2)
    return Cplx(number_from_json(j[0], where), number_from_json(j[1], where));
  throw StructureError(where + ": expected [re, im] or a real number");
}

Mat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw StructureError(where + ": expected an array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  if (!j[0].is_array()) throw StructureError(where + ": rows must be arrays");
  const Index cols = static_cast<Index>(j[0].size());
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw StructureError(where + ": rows have inconsistent lengths");
    for (Index k = 0; k < cols; ++k)
      out(i, k) = complex_from_json(row[static_cast<std::size_t>(k)], where);
  }
  return out;
}

const json& get_field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw StructureError(where + ": missing field '" + name + "'");
  return *it;
}

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (item.key() == name) known = true;
    if (!known) throw StructureError(where + ": unknown field '" + item.key() + "'");
  }
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw StructureError(std::string("invalid JSON: ") + e.what());
  }
}

long integer_from_json(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw StructureError(where + ": expected an integer");
  return j.get<long>();
}

GaussianInput input_from_json(const json& obj) {
  if (!obj.is_object()) throw StructureError("input: expected an object");
  reject_unknown_fields(obj, {"n_mat", "m_mat"}, "input");
  return GaussianInput(matrix_from_json(get_field(obj, "n_mat", "input"), "input.n_mat"),
                       matrix_from_json(get_field(obj, "m_mat", "input"), "input.m_mat"));
}

}  // namespace

FileKind detect_file_kind(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw StructureError("file: expected a JSON object");
  if (j.contains("omega_minus")) return FileKind::system;
  if (j.contains("samples")) return FileKind::dataset;
  if (j.contains("a") && j.contains("b") && j.contains("c") && j.contains("d"))
    return FileKind::realization;
  throw StructureError("file: fields match no known format");
}

SystemFile parse_system_json(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw StructureError("system file: expected a JSON object");
  reject_unknown_fields(
      j, {"modes", "channels", "omega_minus", "omega_plus", "c_minus", "c_plus", "input"},
      "system file");
  const long modes = integer_from_json(get_field(j, "modes", "system file"), "modes");
  const long channels = integer_from_json(get_field(j, "channels", "system file"), "channels");
  QlsParams params(matrix_from_json(get_field(j, "omega_minus", "system file"), "omega_minus"),
                   matrix_from_json(get_field(j, "omega_plus", "system file"), "omega_plus"),
                   matrix_from_json(get_field(j, "c_minus", "system file"), "c_minus"),
                   matrix_from_json(get_field(j, "c_plus", "system file"), "c_plus"));
  if (params.modes() != modes || params.channels() != channels)
    throw DimensionError("system file: declared mode/channel counts do not match the matrices");
  SystemFile out{std::move(params), std::nullopt};
  if (j.contains("input")) {
    out.input = input_from_json(j["input"]);
    if (out.input->channels() != out.params.channels())
      throw DimensionError("system file: input channel count does not match the system");
  }
  return out;
}

std::string system_to_json(const QlsParams& params, const GaussianInput* input) {
  json j;
  j["modes"] = params.modes();
  j["channels"] = params.channels();
  j["omega_minus"] = matrix_to_json(params.omega_minus());
  j["omega_plus"] = matrix_to_json(params.omega_plus());
  j["c_minus"] = matrix_to_json(params.c_minus());
  j["c_plus"] = matrix_to_json(params.c_plus());
  if (input != nullptr) {
    j["input"] = {{"n_mat", matrix_to_json(input->n_mat())},
                  {"m_mat", matrix_to_json(input->m_mat())}};
  }
  return j.dump(2) + "\n";
}

SpectrumDataset parse_dataset_json(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw StructureError("dataset file: expected a JSON object");
  reject_unknown_fields(j, {"omegas", "samples", "shots", "seed"}, "dataset file");
  SpectrumDataset data;
  const json& omegas = get_field(j, "omegas", "dataset file");
  if (!omegas.is_array()) throw StructureError("omegas: expected an array");
  for (const json& w : omegas) data.omegas.push_back(number_from_json(w, "omegas"));
  const json& samples = get_field(j, "samples", "dataset file");
  if (!samples.is_array()) throw StructureError("samples: expected an array");
  for (const json& s : samples) data.samples.push_back(matrix_from_json(s, "samples"));
  data.shots = integer_from_json(get_field(j, "shots", "dataset file"), "shots");
  const json& seed = get_field(j, "seed", "dataset file");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long>() >= 0))
    throw StructureError("seed: expected a nonnegative integer");
  data.seed = seed.get<std::uint64_t>();
  validate_dataset(data);
  return data;
}

std::string dataset_to_json(const SpectrumDataset& data) {
  json j;
  j["omegas"] = data.omegas;
  json samples = json::array();
  for (const Mat& s : data.samples) samples.push_back(matrix_to_json(s));
  j["samples"] = std::move(samples);
  j["shots"] = data.shots;
  j["seed"] = data.seed;
  return j.dump(2) + "\n";
}

StateSpaceRealization parse_realization_json(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw StructureError("realization file: expected a JSON object");
  reject_unknown_fields(j, {"a", "b", "c", "d"}, "realization file");
  StateSpaceRealization r;
  r.a = matrix_from_json(get_field(j, "a", "realization file"), "a");
  r.b = matrix_from_json(get_field(j, "b", "realization file"), "b");
  r.c = matrix_from_json(get_field(j, "c", "realization file"), "c");
  r.d = matrix_from_json(get_field(j, "d", "realization file"), "d");
  if (r.d.rows() != r.d.cols()) throw DimensionError("realization file: d must be square");
  if (r.a.rows() == 0) {
    r.a.resize(0, 0);
    r.b.resize(0, r.d.cols());
    if (r.c.size() == 0) r.c.resize(r.d.rows(), 0);
  }
  if (r.a.rows() != r.a.cols()) throw DimensionError("realization file: a must be square");
  if (r.b.rows() != r.a.rows() || r.c.cols() != r.a.rows() || r.b.cols() != r.d.cols() ||
      r.c.rows() != r.d.rows())
    throw DimensionError("realization file: block shapes are inconsistent");
  return r;
}

std::string realization_to_json(const StateSpaceRealization& realization) {
  json j;
  j["a"] = matrix_to_json(realization.a);
  j["b"] = matrix_to_json(realization.b);
  j["c"] = matrix_to_json(realization.c);
  j["d"] = matrix_to_json(realization.d);
  return j.dump(2) + "\n";
}

std::string identification_report_json(const IdentificationResult& result) {
  json j;
  j["residuals"] = {{"gram_w3", result.residuals.gram_w3},
                    {"gram_w1", result.residuals.gram_w1},
                    {"factor_t3", result.residuals.factor_t3},
                    {"factor_t1", result.residuals.factor_t1},
                    {"structure", result.residuals.structure},
                    {"realizability", result.residuals.realizability},
                    {"symplectic_link", result.residuals.symplectic_link},
                    {"spectrum_match", result.residuals.spectrum_match},
                    {"cascade_match", result.residuals.cascade_match}};
  j["t1"] = matrix_to_json(result.t1);
  j["t2"] = matrix_to_json(result.t2);
  j["t3"] = matrix_to_json(result.t3);
  j["relating_symplectic"] = matrix_to_json(result.relating_symplectic);
  return j.dump(2) + "\n";
}

std::string gilbert_to_json(const GilbertRealization& gilbert) {
  json j;
  j["modes"] = gilbert.n_modes;
  j["channels"] = gilbert.n_channels;
  json poles = json::array();
  for (Cplx p : gilbert.poles) poles.push_back(complex_to_json(p));
  j["poles"] = std::move(poles);
  json residues = json::array();
  for (const Mat& r : gilbert.residues) residues.push_back(matrix_to_json(r));
  j["residues"] = std::move(residues);
  j["a0_diag"] = matrix_to_json(gilbert.a0_diag);
  j["b0"] = matrix_to_json(gilbert.b0);
  j["c0"] = matrix_to_json(gilbert.c0);
  j["d"] = matrix_to_json(gilbert.d);
  return j.dump(2) + "\n";
}

std::string fit_report_json(const LoewnerFit& fit) {
  json j;
  j["detected_order"] = fit.detected_order;
  json poles = json::array();
  for (Cplx p : fit.poles) poles.push_back(complex_to_json(p));
  j["poles"] = std::move(poles);
  j["singular_values"] = fit.singular_values;
  j["realization"] = {{"a", matrix_to_json(fit.realization.a)},
                      {"b", matrix_to_json(fit.realization.b)},
                      {"c", matrix_to_json(fit.realization.c)},
                      {"d", matrix_to_json(fit.realization.d)}};
  return j.dump(2) + "\n";
}

std::string matrix_to_json_text(const Mat& m) { return matrix_to_json(m).dump(); }

std::string spectrum_to_json_text(const Vec& eigenvalues) {
  json arr = json::array();
  for (Index i = 0; i < eigenvalues.size(); ++i) arr.push_back(complex_to_json(eigenvalues(i)));
  return arr.dump();
}

std::string load_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructureError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw StructureError("read error on file: " + path);
  return buf.str();
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructureError("cannot write file: " + path);
  out << text;
  out.flush();
  if (!out.good()) throw StructureError("write error on file: " + path);
}

void write_sweep_csv(std::ostream& out, const std::vector<double>& omegas,
                     const std::vector<Mat>& values, const std::string& label) {
  if (omegas.size() != values.size())
    throw DimensionError("sweep: frequency and value counts differ");
  char buf[40];
  const auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
  };
  const Index rows = values.empty() ? 0 : values.front().rows();
  const Index cols = values.empty() ? 0 : values.front().cols();
  out << "omega";
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out << "," << label << "_re_" << i << "_" << j << "," << label << "_im_" << i << "_" << j;
  out << "\n";
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (values[k].rows() != rows || values[k].cols() != cols)
      throw DimensionError("sweep: value shapes are inconsistent");
    out << fmt(omegas[k]);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        out << "," << fmt(values[k](i, j).real()) << "," << fmt(values[k](i, j).imag());
    out << "\n";
  }
}

}  // namespace qls

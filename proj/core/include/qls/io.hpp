#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qls/cascade.hpp"
#include "qls/estimate.hpp"
#include "qls/identify.hpp"
#include "qls/model.hpp"

namespace qls {

/// JSON conventions: complex scalars are [re, im] pairs (plain numbers are
/// accepted on input as reals), matrices are row-major nested arrays.
/// Parsers are strict: malformed JSON, wrong types, inconsistent shapes and
/// unknown fields all throw StructureError (or DimensionError for shape
/// mismatches); nothing is silently repaired.

/// A system file: defining parameters plus an optional stationary input.
struct SystemFile {
  QlsParams params;
  std::optional<GaussianInput> input;
};

enum class FileKind { system, dataset, realization };

/// Classifies JSON text by its fields: "omega_minus" marks a system file,
/// "samples" a dataset, "a"/"b"/"c"/"d" a realization.
FileKind detect_file_kind(const std::string& text);

SystemFile parse_system_json(const std::string& text);
std::string system_to_json(const QlsParams& params, const GaussianInput* input = nullptr);

SpectrumDataset parse_dataset_json(const std::string& text);
std::string dataset_to_json(const SpectrumDataset& data);

StateSpaceRealization parse_realization_json(const std::string& text);
std::string realization_to_json(const StateSpaceRealization& realization);

/// Diagnostics payloads (residuals, poles, singular values) as JSON text.
std::string identification_report_json(const IdentificationResult& result);
std::string gilbert_to_json(const GilbertRealization& gilbert);
std::string fit_report_json(const LoewnerFit& fit);

/// One matrix (or complex vector) as JSON text, for report composition.
std::string matrix_to_json_text(const Mat& m);
std::string spectrum_to_json_text(const Vec& eigenvalues);

/// Whole-file helpers; failures throw StructureError naming the path.
std::string load_text_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& text);

/// CSV frequency sweep: header "omega,<label>_re_i_j,<label>_im_i_j,...",
/// one row per frequency, 12 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<double>& omegas,
                     const std::vector<Mat>& values, const std::string& label);

}  // namespace qls

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divweb/error.hpp"
#include "divweb/normalform.hpp"
#include "divweb/web.hpp"
#include "json.hpp"

namespace divweb::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kNegative = 1, kInputError = 2, kNumericError = 3 };

/// Malformed or schema-invalid input document.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// The "tolerances" block of a spec file. Precedence for `zero`:
/// command-line flag, then DIVWEB_TOL, then the file, then the default.
struct Tolerances {
  double zero = kDefaultZeroTolerance;  // triviality / symbolic-zero sampling
  double quadrature = 1e-12;            // absolute quadrature tolerance
  double reflection = 1e-12;            // relative reflection residual
  double split = 1e-8;                  // equal-split cell spread
};

Tolerances resolve_tolerances(const json& doc, std::optional<double> flag);

/// A web spec file after validation. Blocks listed in any order are made
/// contiguous: chart axis k holds input variable layout.order[k].
struct LoadedWeb {
  WebChart web;
  BlockLayout layout;
  std::vector<std::string> input_variables;
  Tolerances tol;
  std::optional<std::string> spacetime;
  json source;

  std::vector<double> to_chart(std::span<const double> input_point) const;
  std::vector<double> to_input(std::span<const double> chart_point) const;
  /// Chart axis of 1-based input variable number `one_based`.
  int chart_axis(int one_based) const;
};

LoadedWeb load_web_spec(const json& doc, std::optional<double> tol_flag = {});

/// Tensor file: variables, blocks, domain and upper or full entries.
struct LoadedTensor {
  std::vector<std::vector<Expr>> full;  // chart order, m×m
  BlockFrame frame;
  BlockLayout layout;
  Box domain;
  json source;
};

LoadedTensor load_tensor_spec(const json& doc);

/// Boundary file: one expression per block, in the tensor file's block order.
BoundaryData load_boundary_spec(const json& doc, const LoadedTensor& tensor);

json read_json_file(const std::string& path);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

struct Polyline {
  std::vector<std::array<double, 2>> points;
  std::string color = "#1f4e79";
  double width = 1.0;
};

/// Plain SVG with one <polyline> per entry, scaled to a square canvas.
std::string svg_polylines(const std::vector<Polyline>& lines, const std::string& title, int size = 600);

/// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace divweb::cli

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include "divweb/cli.hpp"

namespace divweb::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SpecError(path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw SpecError(path + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw SpecError(path + ": rename failed");
  }
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << num(r[k]);
    out << '\n';
  }
  return out.str();
}

std::string svg_polylines(const std::vector<Polyline>& lines, const std::string& title, int size) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& l : lines)
    for (const auto& p : l.points) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  if (!(x0 <= x1)) x0 = y0 = 0, x1 = y1 = 1;
  double span = std::max(x1 - x0, y1 - y0);
  if (span <= 0) span = 1;
  const double margin = 20;
  const double scale = (size - 2 * margin) / span;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  auto X = [&](double x) { return 0.5 * size + (x - cx) * scale; };
  auto Y = [&](double y) { return 0.5 * size - (y - cy) * scale; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "<title>" << escape(title) << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size << "\" fill=\"white\"/>\n";
  for (const auto& l : lines) {
    if (l.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << escape(l.color) << "\" stroke-width=\"" << l.width << "\" points=\"";
    for (std::size_t k = 0; k < l.points.size(); ++k)
      out << (k ? " " : "") << coord(X(l.points[k][0])) << ',' << coord(Y(l.points[k][1]));
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace divweb::cli

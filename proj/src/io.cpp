#include "kfbi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace kfbi {

double sample_linear(const CartesianGrid& grid, const std::vector<double>& values, const Vec3& p) {
  require(static_cast<long>(values.size()) == grid.num_nodes(),
          "sample: field size does not match the grid");
  int base[3] = {0, 0, 0};
  double w[3] = {0.0, 0.0, 0.0};
  for (int d = 0; d < grid.dim; ++d) {
    const double s = (p[d] - grid.low[d]) / grid.h;
    require(s >= -1e-9 && s <= grid.cells + 1e-9, "sample: point lies outside the box");
    int k = static_cast<int>(std::floor(s));
    k = std::max(0, std::min(grid.cells - 1, k));
    base[d] = k;
    w[d] = s - k;
  }
  double acc = 0.0;
  const int corners = grid.dim == 2 ? 4 : 8;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    int idx[3] = {base[0], base[1], base[2]};
    for (int d = 0; d < grid.dim; ++d) {
      const int bit = (c >> d) & 1;
      weight *= bit ? w[d] : 1.0 - w[d];
      idx[d] += bit;
    }
    acc += weight * values[grid.index(idx[0], idx[1], idx[2])];
  }
  return acc;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  std::string s(buf, res.ptr);
  // to_chars shortest form may be pure digits; that is fine for CSV and VTK.
  return s;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t k = 0; k < fields.size(); ++k) {
    if (k) line += ',';
    const std::string& f = fields[k];
    if (f.find_first_of(",\"\r\n") != std::string::npos) {
      line += '"';
      for (char c : f) {
        if (c == '"') line += '"';
        line += c;
      }
      line += '"';
    } else {
      line += f;
    }
  }
  line += "\r\n";
  return line;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: keep CRLF exactly
  require(out.good(), "csv: cannot open " + path + " for writing");
  out << csv_line(header);
  std::vector<std::string> fields;
  for (const auto& row : rows) {
    require(row.size() == header.size(), "csv: row width does not match the header");
    fields.clear();
    for (double x : row) fields.push_back(format_number(x));
    out << csv_line(fields);
  }
  require(out.good(), "csv: write to " + path + " failed");
}

namespace {

void write_scalar(std::ofstream& out, const std::string& name, const std::string& type,
                  const std::vector<double>& values) {
  out << "SCALARS " << name << " " << type << " 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : values) out << format_number(v) << "\n";
}

}  // namespace

void write_snapshot(const std::string& path, const CartesianGrid& grid,
                    const std::vector<uint8_t>& inside, const BidomainState& state,
                    const FieldPair& phi, bool pin_extracellular_mean) {
  const long n = grid.num_nodes();
  require(static_cast<long>(state.vm.size()) == n && static_cast<long>(inside.size()) == n &&
              phi.size() == n,
          "snapshot: field sizes do not match the grid");

  std::vector<double> phi_i = phi.i, phi_e = phi.e;
  if (pin_extracellular_mean) {
    double sum = 0.0;
    long count = 0;
    for (long k = 0; k < n; ++k)
      if (inside[k]) {
        sum += phi_e[k];
        ++count;
      }
    const double shift = count > 0 ? sum / count : 0.0;
    for (long k = 0; k < n; ++k) {
      phi_i[k] -= shift;
      phi_e[k] -= shift;
    }
  }

  std::ofstream out(path);
  require(out.good(), "snapshot: cannot open " + path + " for writing");
  const int npa = grid.nodes_per_axis();
  out << "# vtk DataFile Version 3.0\n";
  out << "bidomain state at t = " << format_number(state.t) << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << npa << " " << npa << " " << (grid.dim == 3 ? npa : 1) << "\n";
  out << "ORIGIN " << format_number(grid.low[0]) << " " << format_number(grid.low[1]) << " "
      << format_number(grid.dim == 3 ? grid.low[2] : 0.0) << "\n";
  out << "SPACING " << format_number(grid.h) << " " << format_number(grid.h) << " "
      << format_number(grid.h) << "\n";
  out << "POINT_DATA " << n << "\n";
  write_scalar(out, "Vm", "double", state.vm);
  write_scalar(out, "Phi_i", "double", phi_i);
  write_scalar(out, "Phi_e", "double", phi_e);
  write_scalar(out, "q", "double", state.q);
  out << "SCALARS inside int 1\n";
  out << "LOOKUP_TABLE default\n";
  for (long k = 0; k < n; ++k) out << int(inside[k]) << "\n";
  require(out.good(), "snapshot: write to " + path + " failed");
}

}  // namespace kfbi

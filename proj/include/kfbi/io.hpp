#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfbi/bidomain.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

// Bilinear (2D) / trilinear (3D) interpolation of a node field at p. The
// point must lie inside the box.
double sample_linear(const CartesianGrid& grid, const std::vector<double>& values, const Vec3& p);

// Shortest round-trip decimal representation; integral values print with no
// decimal point. Keeps CSV output locale-independent and bitwise reproducible.
std::string format_number(double x);

// RFC 4180: comma separated, CRLF line endings, fields quoted only when they
// need it. NaN prints as an empty field.
std::string csv_line(const std::vector<std::string>& fields);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Legacy ASCII VTK structured-points snapshot with point scalars Vm, Phi_i,
// Phi_e, q and the inside mask. pin_extracellular_mean shifts both potentials
// by the mean of Phi_e over inside nodes (a gauge change: Vm is untouched).
void write_snapshot(const std::string& path, const CartesianGrid& grid,
                    const std::vector<uint8_t>& inside, const BidomainState& state,
                    const FieldPair& phi, bool pin_extracellular_mean);

}  // namespace kfbi

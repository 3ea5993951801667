#pragma once

// ASCII mesh I/O: OFF, OBJ, PLY (ASCII only -- binary would break bit-exact
// golden files). Loading performs no welding or repair; writers print
// positions at 9 significant digits so write -> load round-trips.
//
// Per-vertex scalars ride along as a PLY property ("quality", plus a white->
// red color ramp) or as a sidecar table for OFF/OBJ:
//     # gsd-scalars v1 <count>
//     <one float per line>

#include "gsd/mesh.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsd {

enum class MeshFormat { off, obj, ply_ascii };

// pick a format from a file extension (.off/.obj/.ply); data error otherwise
[[nodiscard]] MeshFormat format_from_path(const std::string& path);

[[nodiscard]] TriangleMesh load_mesh(std::istream& in, MeshFormat format);
[[nodiscard]] TriangleMesh load_mesh_file(const std::string& path);

void write_mesh(std::ostream& out, const TriangleMesh& mesh, MeshFormat format,
                const std::vector<double>* vertex_scalars = nullptr);

// Writes <path>; when scalars are given with OFF/OBJ they go to the sidecar
// "<path>.scalars.txt". PLY embeds them as per-vertex quality + color ramp.
void write_mesh_file(const std::string& path, const TriangleMesh& mesh,
                     const std::vector<double>* vertex_scalars = nullptr);

void write_scalars(std::ostream& out, const std::vector<double>& values);
[[nodiscard]] std::vector<double> load_scalars(std::istream& in);

}  // namespace gsd

#include "gsd/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gsd {

namespace {

struct LineReader {
  std::istream& in;
  int number = 0;  // physical line number of the last line returned
  std::string line;

  explicit LineReader(std::istream& s) : in(s) {}

  bool next() {
    if (!std::getline(in, line)) return false;
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  // skips blank and '#'-comment lines
  bool next_content() {
    while (next()) {
      auto pos = line.find_first_not_of(" \t");
      if (pos == std::string::npos) continue;
      if (line[pos] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    fail_data("line " + std::to_string(number) + ": " + message);
  }
};

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_double(const std::string& tok, const LineReader& reader) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    reader.fail("expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) reader.fail("trailing junk in number '" + tok + "'");
  return v;
}

long parse_int(const std::string& tok, const LineReader& reader) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    reader.fail("expected an integer, got '" + tok + "'");
  }
  if (used != tok.size()) reader.fail("trailing junk in integer '" + tok + "'");
  return v;
}

int face_vertex(long raw, int vertex_count, const LineReader& reader) {
  if (raw < 0 || raw >= vertex_count)
    reader.fail("vertex index " + std::to_string(raw) + " outside [0, " +
                std::to_string(vertex_count) + ")");
  return static_cast<int>(raw);
}

TriangleMesh load_off(std::istream& in) {
  LineReader reader(in);
  if (!reader.next_content()) fail_data("empty OFF stream");
  {
    auto tokens = split_tokens(reader.line);
    if (tokens.empty() || tokens[0] != "OFF")
      reader.fail("expected the OFF magic token");
  }
  if (!reader.next_content()) reader.fail("missing count line");
  auto counts = split_tokens(reader.line);
  if (counts.size() < 2) reader.fail("expected vertex and face counts");
  long nv = parse_int(counts[0], reader);
  long nf = parse_int(counts[1], reader);
  if (nv < 0 || nf < 0) reader.fail("negative counts");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!reader.next_content()) reader.fail("unexpected end of vertex list");
    auto tokens = split_tokens(reader.line);
    if (tokens.size() < 3) reader.fail("expected three coordinates");
    mesh.vertices.emplace_back(parse_double(tokens[0], reader),
                               parse_double(tokens[1], reader),
                               parse_double(tokens[2], reader));
  }
  mesh.triangles.reserve(static_cast<std::size_t>(nf));
  for (long i = 0; i < nf; ++i) {
    if (!reader.next_content()) reader.fail("unexpected end of face list");
    auto tokens = split_tokens(reader.line);
    if (tokens.empty()) reader.fail("empty face record");
    long n = parse_int(tokens[0], reader);
    if (n != 3)
      reader.fail("non-triangular face with " + std::to_string(n) +
                  " vertices");
    if (tokens.size() < 4) reader.fail("face record is too short");
    mesh.triangles.push_back(
        {face_vertex(parse_int(tokens[1], reader), mesh.vertex_count(), reader),
         face_vertex(parse_int(tokens[2], reader), mesh.vertex_count(), reader),
         face_vertex(parse_int(tokens[3], reader), mesh.vertex_count(), reader)});
  }
  return mesh;
}

TriangleMesh load_obj(std::istream& in) {
  LineReader reader(in);
  TriangleMesh mesh;
  while (reader.next_content()) {
    auto tokens = split_tokens(reader.line);
    const std::string& kind = tokens[0];
    if (kind == "v") {
      if (tokens.size() < 4) reader.fail("expected three coordinates");
      mesh.vertices.emplace_back(parse_double(tokens[1], reader),
                                 parse_double(tokens[2], reader),
                                 parse_double(tokens[3], reader));
    } else if (kind == "f") {
      if (tokens.size() != 4)
        reader.fail("non-triangular face with " +
                    std::to_string(tokens.size() - 1) + " vertices");
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        std::string tok = tokens[static_cast<std::size_t>(k + 1)];
        auto slash = tok.find('/');
        if (slash != std::string::npos) tok = tok.substr(0, slash);
        long raw = parse_int(tok, reader);
        // OBJ indices are 1-based; negative counts back from the end
        long resolved = raw < 0 ? mesh.vertex_count() + raw : raw - 1;
        tri[static_cast<std::size_t>(k)] =
            face_vertex(resolved, mesh.vertex_count(), reader);
      }
      mesh.triangles.push_back(tri);
    }
    // vn / vt / usemtl / o / g / s / mtllib are ignored
  }
  return mesh;
}

TriangleMesh load_ply(std::istream& in) {
  LineReader reader(in);
  if (!reader.next_content() || split_tokens(reader.line) !=
                                    std::vector<std::string>{"ply"})
    reader.fail("expected the ply magic token");
  if (!reader.next_content()) reader.fail("missing format line");
  {
    auto tokens = split_tokens(reader.line);
    if (tokens.size() < 2 || tokens[0] != "format" || tokens[1] != "ascii")
      reader.fail("only ascii PLY is supported");
  }

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> properties;  // scalar property names, in order
    bool has_list = false;
  };
  std::vector<Element> elements;
  while (true) {
    if (!reader.next_content()) reader.fail("unterminated header");
    auto tokens = split_tokens(reader.line);
    if (tokens[0] == "comment") continue;
    if (tokens[0] == "end_header") break;
    if (tokens[0] == "element") {
      if (tokens.size() < 3) reader.fail("malformed element line");
      elements.push_back({tokens[1], parse_int(tokens[2], reader), {}, false});
    } else if (tokens[0] == "property") {
      if (elements.empty()) reader.fail("property before any element");
      if (tokens.size() >= 2 && tokens[1] == "list") {
        elements.back().has_list = true;
      } else {
        if (tokens.size() < 3) reader.fail("malformed property line");
        elements.back().properties.push_back(tokens.back());
      }
    } else {
      reader.fail("unrecognized header line '" + tokens[0] + "'");
    }
  }

  TriangleMesh mesh;
  for (const auto& element : elements) {
    if (element.name == "vertex") {
      if (element.has_list) fail_data("list-valued vertex properties are not supported");
      auto find_prop = [&](const std::string& name) {
        auto it = std::find(element.properties.begin(),
                            element.properties.end(), name);
        if (it == element.properties.end())
          fail_data("vertex element lacks property '" + name + "'");
        return static_cast<std::size_t>(it - element.properties.begin());
      };
      std::size_t ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
      mesh.vertices.reserve(static_cast<std::size_t>(element.count));
      for (long i = 0; i < element.count; ++i) {
        if (!reader.next_content()) reader.fail("unexpected end of vertex data");
        auto tokens = split_tokens(reader.line);
        if (tokens.size() < element.properties.size())
          reader.fail("expected " + std::to_string(element.properties.size()) +
                      " vertex values");
        mesh.vertices.emplace_back(parse_double(tokens[ix], reader),
                                   parse_double(tokens[iy], reader),
                                   parse_double(tokens[iz], reader));
      }
    } else if (element.name == "face") {
      mesh.triangles.reserve(static_cast<std::size_t>(element.count));
      for (long i = 0; i < element.count; ++i) {
        if (!reader.next_content()) reader.fail("unexpected end of face data");
        auto tokens = split_tokens(reader.line);
        if (tokens.empty()) reader.fail("empty face record");
        long n = parse_int(tokens[0], reader);
        if (n != 3)
          reader.fail("non-triangular face with " + std::to_string(n) +
                      " vertices");
        if (tokens.size() < 4) reader.fail("face record is too short");
        mesh.triangles.push_back(
            {face_vertex(parse_int(tokens[1], reader), mesh.vertex_count(),
                         reader),
             face_vertex(parse_int(tokens[2], reader), mesh.vertex_count(),
                         reader),
             face_vertex(parse_int(tokens[3], reader), mesh.vertex_count(),
                         reader)});
      }
    } else {
      // skip unknown elements line by line
      for (long i = 0; i < element.count; ++i)
        if (!reader.next_content()) reader.fail("unexpected end of element data");
    }
  }
  return mesh;
}

int count_unique_edges(const TriangleMesh& mesh) {
  std::set<std::uint64_t> keys;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      keys.insert(EdgeTable::key(tri[static_cast<std::size_t>(k)],
                                 tri[static_cast<std::size_t>((k + 1) % 3)]));
  return static_cast<int>(keys.size());
}

void check_scalars(const TriangleMesh& mesh,
                   const std::vector<double>* scalars) {
  if (scalars && static_cast<int>(scalars->size()) != mesh.vertex_count())
    fail_data("scalar count " + std::to_string(scalars->size()) +
              " does not match vertex count " +
              std::to_string(mesh.vertex_count()));
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out << "OFF\n"
      << mesh.vertex_count() << ' ' << mesh.triangle_count() << ' '
      << count_unique_edges(mesh) << '\n';
  for (const auto& v : mesh.vertices)
    out << format_g9(v.x()) << ' ' << format_g9(v.y()) << ' '
        << format_g9(v.z()) << '\n';
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  for (const auto& v : mesh.vertices)
    out << "v " << format_g9(v.x()) << ' ' << format_g9(v.y()) << ' '
        << format_g9(v.z()) << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply(std::ostream& out, const TriangleMesh& mesh,
               const std::vector<double>* scalars) {
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << mesh.vertex_count() << '\n'
      << "property float x\nproperty float y\nproperty float z\n";
  if (scalars)
    out << "property float quality\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.triangle_count() << '\n'
      << "property list uchar int vertex_indices\nend_header\n";

  double lo = 0.0, hi = 1.0;
  if (scalars && !scalars->empty()) {
    lo = *std::min_element(scalars->begin(), scalars->end());
    hi = *std::max_element(scalars->begin(), scalars->end());
  }
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertices[static_cast<std::size_t>(i)];
    out << format_g9(v.x()) << ' ' << format_g9(v.y()) << ' '
        << format_g9(v.z());
    if (scalars) {
      double q = (*scalars)[static_cast<std::size_t>(i)];
      double t = hi > lo ? (q - lo) / (hi - lo) : 0.0;
      // white (low) -> red (high)
      int gb = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      out << ' ' << format_g9(q) << " 255 " << gb << ' ' << gb;
    }
    out << '\n';
  }
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos)
    fail_data("cannot infer a mesh format from '" + path + "'");
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == "off") return MeshFormat::off;
  if (ext == "obj") return MeshFormat::obj;
  if (ext == "ply") return MeshFormat::ply_ascii;
  fail_data("unsupported mesh extension '." + ext + "'");
}

TriangleMesh load_mesh(std::istream& in, MeshFormat format) {
  switch (format) {
    case MeshFormat::off:
      return load_off(in);
    case MeshFormat::obj:
      return load_obj(in);
    case MeshFormat::ply_ascii:
      return load_ply(in);
  }
  fail_data("unknown mesh format");
}

TriangleMesh load_mesh_file(const std::string& path) {
  auto format = format_from_path(path);
  std::ifstream in(path);
  if (!in) fail_data("cannot open '" + path + "' for reading");
  try {
    return load_mesh(in, format);
  } catch (const Error& err) {
    throw Error(err.kind(), path + ": " + err.what());
  }
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh, MeshFormat format,
                const std::vector<double>* vertex_scalars) {
  check_scalars(mesh, vertex_scalars);
  switch (format) {
    case MeshFormat::off:
      write_off(out, mesh);
      return;
    case MeshFormat::obj:
      write_obj(out, mesh);
      return;
    case MeshFormat::ply_ascii:
      write_ply(out, mesh, vertex_scalars);
      return;
  }
  fail_data("unknown mesh format");
}

void write_mesh_file(const std::string& path, const TriangleMesh& mesh,
                     const std::vector<double>* vertex_scalars) {
  auto format = format_from_path(path);
  check_scalars(mesh, vertex_scalars);
  std::ofstream out(path);
  if (!out) fail_data("cannot open '" + path + "' for writing");
  write_mesh(out, mesh, format, vertex_scalars);
  if (!out) fail_data("failed while writing '" + path + "'");
  if (vertex_scalars && format != MeshFormat::ply_ascii) {
    std::string sidecar = path + ".scalars.txt";
    std::ofstream side(sidecar);
    if (!side) fail_data("cannot open '" + sidecar + "' for writing");
    write_scalars(side, *vertex_scalars);
  }
}

void write_scalars(std::ostream& out, const std::vector<double>& values) {
  out << "# gsd-scalars v1 " << values.size() << '\n';
  for (double v : values) out << format_g9(v) << '\n';
}

std::vector<double> load_scalars(std::istream& in) {
  LineReader reader(in);
  if (!reader.next()) fail_data("empty scalar stream");
  auto tokens = split_tokens(reader.line);
  if (tokens.size() != 4 || tokens[0] != "#" || tokens[1] != "gsd-scalars" ||
      tokens[2] != "v1")
    reader.fail("expected a '# gsd-scalars v1 <count>' header");
  long count = parse_int(tokens[3], reader);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  while (static_cast<long>(values.size()) < count && reader.next_content()) {
    for (const auto& tok : split_tokens(reader.line))
      values.push_back(parse_double(tok, reader));
  }
  if (static_cast<long>(values.size()) != count)
    fail_data("scalar sidecar announced " + std::to_string(count) +
              " values but held " + std::to_string(values.size()));
  return values;
}

}  // namespace gsd

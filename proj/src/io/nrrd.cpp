#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "voxflow/core/error.hpp"
#include "voxflow/core/table.hpp"
#include "voxflow/io/image_io.hpp"

namespace voxflow::io {

namespace {

std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string &s, const std::string &field) {
  double v = 0.0;
  const auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) fail("NotNrrd", "bad number '" + s + "' in field " + field);
  return v;
}

// Parses "(a,b,c)" vectors separated by whitespace; "none" yields no vector.
std::vector<Vec3> parse_vectors(const std::string &s) {
  std::vector<Vec3> out;
  std::size_t pos = 0;
  while ((pos = s.find('(', pos)) != std::string::npos) {
    const auto end = s.find(')', pos);
    if (end == std::string::npos) fail("NotNrrd", "unterminated vector");
    std::stringstream ss(s.substr(pos + 1, end - pos - 1));
    Vec3 v{};
    std::string item;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!std::getline(ss, item, ',')) fail("NotNrrd", "vector needs 3 components");
      v[i] = parse_double(item, "vector");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

Scalar scalar_from_nrrd(std::string t) {
  t = lower(trim(t));
  static const std::map<std::string, Scalar> names = {
      {"signed char", Scalar::I8},     {"int8", Scalar::I8},
      {"int8_t", Scalar::I8},          {"uchar", Scalar::U8},
      {"unsigned char", Scalar::U8},   {"uint8", Scalar::U8},
      {"uint8_t", Scalar::U8},         {"short", Scalar::I16},
      {"short int", Scalar::I16},      {"signed short", Scalar::I16},
      {"signed short int", Scalar::I16}, {"int16", Scalar::I16},
      {"int16_t", Scalar::I16},        {"ushort", Scalar::U16},
      {"unsigned short", Scalar::U16}, {"unsigned short int", Scalar::U16},
      {"uint16", Scalar::U16},         {"uint16_t", Scalar::U16},
      {"int", Scalar::I32},            {"signed int", Scalar::I32},
      {"int32", Scalar::I32},          {"int32_t", Scalar::I32},
      {"uint", Scalar::U32},           {"unsigned int", Scalar::U32},
      {"uint32", Scalar::U32},         {"uint32_t", Scalar::U32},
      {"float", Scalar::F32},          {"double", Scalar::F64},
  };
  auto it = names.find(t);
  if (it == names.end()) fail("UnsupportedField", "type '" + t + "'");
  return it->second;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
  case Scalar::I8:
  case Scalar::U8: return 1;
  case Scalar::I16:
  case Scalar::U16: return 2;
  case Scalar::I32:
  case Scalar::U32:
  case Scalar::F32: return 4;
  case Scalar::F64: return 8;
  }
  return 1;
}

template <typename T> double fetch(const std::uint8_t *p, bool swap) {
  T v = load_le<T>(p);
  return static_cast<double>(swap ? byteswap_value(v) : v);
}

double fetch_scalar(Scalar s, const std::uint8_t *p, bool swap) {
  switch (s) {
  case Scalar::I8: return fetch<std::int8_t>(p, false);
  case Scalar::U8: return fetch<std::uint8_t>(p, false);
  case Scalar::I16: return fetch<std::int16_t>(p, swap);
  case Scalar::U16: return fetch<std::uint16_t>(p, swap);
  case Scalar::I32: return fetch<std::int32_t>(p, swap);
  case Scalar::U32: return fetch<std::uint32_t>(p, swap);
  case Scalar::F32: return fetch<float>(p, swap);
  case Scalar::F64: return fetch<double>(p, swap);
  }
  return 0.0;
}

struct NrrdHeader {
  std::map<std::string, std::string> fields;
  std::map<std::string, std::string> keyvalues;
  std::size_t data_offset = 0;
};

NrrdHeader parse_header(std::span<const std::uint8_t> data) {
  const std::string_view text(reinterpret_cast<const char *>(data.data()), data.size());
  if (text.size() < 8 || text.substr(0, 7) != "NRRD000" || text[7] < '1' || text[7] > '5')
    fail("NotNrrd", "missing NRRD000X magic");
  NrrdHeader h;
  std::size_t pos = text.find('\n');
  if (pos == std::string_view::npos) fail("NotNrrd", "header has no line breaks");
  ++pos;
  while (true) {
    const auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) fail("NotNrrd", "header not terminated by a blank line");
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;
    if (line[0] == '#') continue;
    const auto kv = line.find(":=");
    if (kv != std::string::npos) {
      h.keyvalues[line.substr(0, kv)] = line.substr(kv + 2);
      continue;
    }
    const auto colon = line.find(": ");
    if (colon == std::string::npos) fail("NotNrrd", "malformed header line '" + line + "'");
    h.fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
  }
  h.data_offset = pos;
  return h;
}

} // namespace

ImageVolume read_nrrd(const std::filesystem::path &path) {
  const Bytes data = read_file(path);
  const NrrdHeader h = parse_header(data);
  const auto field = [&h](const std::string &name) -> const std::string * {
    auto it = h.fields.find(name);
    return it == h.fields.end() ? nullptr : &it->second;
  };
  for (const char *unsupported : {"data file", "datafile", "line skip", "lineskip", "byte skip", "byteskip"})
    if (field(unsupported)) fail("UnsupportedField", unsupported);

  const auto *dimension = field("dimension");
  if (!dimension || trim(*dimension) != "3") fail("UnsupportedField", "dimension must be 3");
  const auto *type = field("type");
  if (!type) fail("NotNrrd", "missing type field");
  const Scalar scalar = scalar_from_nrrd(*type);
  const auto *sizes = field("sizes");
  if (!sizes) fail("NotNrrd", "missing sizes field");

  Geometry g;
  {
    std::stringstream ss(*sizes);
    for (std::size_t a = 0; a < 3; ++a) {
      long long n = 0;
      if (!(ss >> n) || n < 1) fail("NotNrrd", "bad sizes field");
      g.dims[a] = static_cast<std::size_t>(n);
    }
  }

  std::string encoding = field("encoding") ? lower(*field("encoding")) : "raw";
  if (encoding == "gz") encoding = "gzip";
  if (encoding != "raw" && encoding != "gzip") fail("EncodingUnsupported", "encoding '" + encoding + "'");
  const bool big_endian = field("endian") && lower(*field("endian")) == "big";

  bool flip_ras = false;
  if (const auto *space = field("space")) {
    const std::string s = lower(*space);
    if (s == "right-anterior-superior" || s == "ras") flip_ras = true;
  }

  if (const auto *dirs = field("space directions")) {
    const auto vecs = parse_vectors(*dirs);
    if (vecs.size() != 3) fail("UnsupportedField", "space directions must hold three vectors");
    for (int c = 0; c < 3; ++c) {
      Vec3 v = vecs[static_cast<std::size_t>(c)];
      if (flip_ras) v = {-v[0], -v[1], v[2]};
      const double s = norm(v);
      if (!(s > 0.0)) fail("NotNrrd", "zero-length space direction");
      g.spacing[static_cast<std::size_t>(c)] = s;
      for (int r = 0; r < 3; ++r) g.direction(r, c) = v[static_cast<std::size_t>(r)] / s;
    }
  } else if (const auto *spacings = field("spacings")) {
    std::stringstream ss(*spacings);
    for (std::size_t a = 0; a < 3; ++a) {
      std::string tok;
      if (!(ss >> tok)) fail("NotNrrd", "bad spacings field");
      g.spacing[a] = tok == "nan" ? 1.0 : std::abs(parse_double(tok, "spacings"));
    }
  }
  if (const auto *origin = field("space origin")) {
    const auto vecs = parse_vectors(*origin);
    if (vecs.size() != 1) fail("NotNrrd", "bad space origin");
    g.origin = vecs[0];
    if (flip_ras) g.origin = {-g.origin[0], -g.origin[1], g.origin[2]};
  }
  g.validate();

  std::span<const std::uint8_t> payload(data.data() + h.data_offset, data.size() - h.data_offset);
  Bytes inflated;
  if (encoding == "gzip") {
    inflated = gzip_decompress(payload);
    payload = inflated;
  }
  const std::size_t count = g.voxel_count();
  const std::size_t bytes = scalar_size(scalar);
  if (payload.size() < count * bytes) fail("TruncatedData", "NRRD payload shorter than sizes declare");

  ImageVolume v;
  v.geometry = g;
  v.voxels.resize(count);
  for (std::size_t i = 0; i < count; ++i) v.voxels[i] = fetch_scalar(scalar, payload.data() + i * bytes, big_endian);
  for (const auto &[key, value] : h.keyvalues) v.meta["nrrd:" + key] = value;
  return v;
}

namespace {

std::string vec_text(const Vec3 &v) {
  return "(" + format_number(v[0]) + "," + format_number(v[1]) + "," + format_number(v[2]) + ")";
}

std::string nrrd_header(const Geometry &g, const std::string &type, bool gzip,
                        const std::vector<std::string> &keyvalues) {
  std::string h = "NRRD0004\n";
  h += "type: " + type + "\n";
  h += "dimension: 3\n";
  h += "space: left-posterior-superior\n";
  h += "sizes: " + std::to_string(g.dims[0]) + " " + std::to_string(g.dims[1]) + " " + std::to_string(g.dims[2]) + "\n";
  h += "space directions:";
  for (int c = 0; c < 3; ++c) h += " " + vec_text(g.spacing[static_cast<std::size_t>(c)] * g.direction.column(c));
  h += "\n";
  h += "kinds: domain domain domain\n";
  h += "endian: little\n";
  h += std::string("encoding: ") + (gzip ? "gzip" : "raw") + "\n";
  h += "space origin: " + vec_text(g.origin) + "\n";
  for (const auto &kv : keyvalues) h += kv + "\n";
  h += "\n";
  return h;
}

std::string finish(std::string header, const Bytes &payload, bool gzip) {
  if (gzip) {
    const Bytes z = gzip_compress(payload);
    header.append(reinterpret_cast<const char *>(z.data()), z.size());
  } else {
    header.append(reinterpret_cast<const char *>(payload.data()), payload.size());
  }
  return header;
}

} // namespace

std::string encode_nrrd(const ImageVolume &v, bool gzip) {
  Bytes payload;
  payload.reserve(v.voxels.size() * 8);
  for (double x : v.voxels) store_le(payload, x);
  return finish(nrrd_header(v.geometry, "double", gzip, {}), payload, gzip);
}

std::string encode_nrrd_mask(const LabelMask &m, bool gzip) {
  std::uint32_t max_label = 0;
  for (auto l : m.labels) max_label = std::max(max_label, l);
  std::vector<std::string> kv;
  for (const auto &[label, name] : m.names) kv.push_back("label_name_" + std::to_string(label) + ":=" + name);
  Bytes payload;
  if (max_label <= 0xffffu) {
    payload.reserve(m.labels.size() * 2);
    for (auto l : m.labels) store_le(payload, static_cast<std::uint16_t>(l));
    return finish(nrrd_header(m.geometry, "uint16", gzip, kv), payload, gzip);
  }
  payload.reserve(m.labels.size() * 4);
  for (auto l : m.labels) store_le(payload, l);
  return finish(nrrd_header(m.geometry, "uint32", gzip, kv), payload, gzip);
}

} // namespace voxflow::io

#include "voxflow/io/dicom.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "voxflow/core/error.hpp"
#include "voxflow/core/polygon.hpp"

namespace voxflow::io {

namespace {

constexpr std::uint32_t kUndefined = 0xFFFFFFFFu;
constexpr std::uint32_t kItem = dicom_tag(0xFFFE, 0xE000);
constexpr std::uint32_t kItemDelim = dicom_tag(0xFFFE, 0xE00D);
constexpr std::uint32_t kSeqDelim = dicom_tag(0xFFFE, 0xE0DD);

const std::string kImplicitLE = "1.2.840.10008.1.2";
const std::string kExplicitLE = "1.2.840.10008.1.2.1";

bool long_vr(const std::string &vr) {
  static const std::set<std::string> l = {"OB", "OD", "OF", "OL", "OV", "OW", "SQ", "SV", "UC", "UN", "UR", "UT", "UV"};
  return l.count(vr) > 0;
}

// VRs for implicit-VR streams; only tags this reader interprets or that are
// commonly sequences need entries.
std::string implicit_vr(std::uint32_t tag) {
  static const std::map<std::uint32_t, std::string> dict = {
      {tags::Modality, "CS"},
      {tags::PatientID, "LO"},
      {tags::SOPInstanceUID, "UI"},
      {tags::SeriesInstanceUID, "UI"},
      {tags::InstanceNumber, "IS"},
      {tags::SliceThickness, "DS"},
      {tags::ImagePositionPatient, "DS"},
      {tags::ImageOrientationPatient, "DS"},
      {tags::SamplesPerPixel, "US"},
      {tags::Rows, "US"},
      {tags::Columns, "US"},
      {tags::PixelSpacing, "DS"},
      {tags::BitsAllocated, "US"},
      {tags::PixelRepresentation, "US"},
      {tags::RescaleIntercept, "DS"},
      {tags::RescaleSlope, "DS"},
      {tags::PixelData, "OW"},
      {tags::StructureSetROISequence, "SQ"},
      {tags::ROINumber, "IS"},
      {tags::ROIName, "LO"},
      {tags::ROIContourSequence, "SQ"},
      {tags::ContourSequence, "SQ"},
      {tags::ContourGeometricType, "CS"},
      {tags::NumberOfContourPoints, "IS"},
      {tags::ContourData, "DS"},
      {tags::ReferencedROINumber, "IS"},
      {dicom_tag(0x0008, 0x1115), "SQ"},
      {dicom_tag(0x0008, 0x1140), "SQ"},
      {dicom_tag(0x3006, 0x0010), "SQ"},
      {dicom_tag(0x3006, 0x0012), "SQ"},
      {dicom_tag(0x3006, 0x0014), "SQ"},
      {dicom_tag(0x3006, 0x0016), "SQ"},
      {dicom_tag(0x3006, 0x0080), "SQ"},
  };
  auto it = dict.find(tag);
  return it == dict.end() ? "UN" : it->second;
}

class Parser {
public:
  Parser(std::span<const std::uint8_t> data, bool explicit_vr) : data_(data), explicit_(explicit_vr) {}

  // Parses elements in [pos, end). Stops early at an item delimiter when
  // `in_item` is set, or before the first element whose group differs from
  // `only_group` when that is nonzero. Returns the position after parsing.
  std::size_t dataset(std::size_t pos, std::size_t end, DicomDataset &ds, bool in_item, std::uint16_t only_group = 0) {
    while (pos < end) {
      need(pos, 8, end);
      const std::uint16_t group = load_le<std::uint16_t>(&data_[pos]);
      const std::uint16_t elem = load_le<std::uint16_t>(&data_[pos + 2]);
      const std::uint32_t tag = dicom_tag(group, elem);
      if (only_group != 0 && group != only_group) return pos;
      if (tag == kItemDelim) {
        if (!in_item) fail("NotDicom", "unexpected item delimiter");
        return pos + 8;
      }
      DicomElement el;
      el.tag = tag;
      std::uint32_t length = 0;
      if (explicit_ && group != 0xFFFE) {
        el.vr.assign(reinterpret_cast<const char *>(&data_[pos + 4]), 2);
        if (!std::isupper(static_cast<unsigned char>(el.vr[0])) || !std::isupper(static_cast<unsigned char>(el.vr[1])))
          fail("NotDicom", "invalid VR in explicit stream");
        if (long_vr(el.vr)) {
          need(pos, 12, end);
          length = load_le<std::uint32_t>(&data_[pos + 8]);
          pos += 12;
        } else {
          length = load_le<std::uint16_t>(&data_[pos + 6]);
          pos += 8;
        }
      } else {
        length = load_le<std::uint32_t>(&data_[pos + 4]);
        el.vr = implicit_vr(tag);
        pos += 8;
      }

      if (el.vr == "SQ" || (length == kUndefined && tag != tags::PixelData)) {
        el.vr = "SQ";
        pos = sequence(pos, length, end, el.items);
      } else if (length == kUndefined) {
        fail("CompressedPixelDataUnsupported", "encapsulated pixel data");
      } else {
        need(pos, length, end);
        el.value.assign(data_.begin() + static_cast<std::ptrdiff_t>(pos),
                        data_.begin() + static_cast<std::ptrdiff_t>(pos + length));
        pos += length;
      }
      ds.elements[tag] = std::move(el);
    }
    if (in_item) fail("NotDicom", "unterminated item");
    return pos;
  }

private:
  std::size_t sequence(std::size_t pos, std::uint32_t length, std::size_t end, std::vector<DicomDataset> &items) {
    const std::size_t seq_end = length == kUndefined ? end : pos + length;
    if (seq_end > end) fail("NotDicom", "sequence overruns its container");
    while (pos < seq_end) {
      need(pos, 8, seq_end);
      const std::uint32_t tag = dicom_tag(load_le<std::uint16_t>(&data_[pos]), load_le<std::uint16_t>(&data_[pos + 2]));
      const std::uint32_t item_len = load_le<std::uint32_t>(&data_[pos + 4]);
      pos += 8;
      if (tag == kSeqDelim) return pos;
      if (tag != kItem) fail("NotDicom", "expected sequence item");
      DicomDataset item;
      if (item_len == kUndefined) {
        pos = dataset(pos, seq_end, item, true);
      } else {
        need(pos, item_len, seq_end);
        dataset(pos, pos + item_len, item, false);
        pos += item_len;
      }
      items.push_back(std::move(item));
    }
    if (length == kUndefined) fail("NotDicom", "unterminated sequence");
    return pos;
  }

  void need(std::size_t pos, std::size_t n, std::size_t end) const {
    if (pos + n > end || pos + n > data_.size()) fail("NotDicom", "truncated element");
  }

  std::span<const std::uint8_t> data_;
  bool explicit_;
};

std::string trim_value(const Bytes &v) {
  std::string s(v.begin(), v.end());
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

} // namespace

const DicomElement *DicomDataset::find(std::uint32_t tag) const {
  auto it = elements.find(tag);
  return it == elements.end() ? nullptr : &it->second;
}

std::optional<std::string> DicomDataset::string(std::uint32_t tag) const {
  const auto *e = find(tag);
  if (!e) return std::nullopt;
  return trim_value(e->value);
}

std::vector<double> DicomDataset::numbers(std::uint32_t tag) const {
  std::vector<double> out;
  const auto s = string(tag);
  if (!s) return out;
  std::stringstream ss(*s);
  std::string item;
  while (std::getline(ss, item, '\\')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception &) {
      fail("NotDicom", "bad decimal string '" + item + "'");
    }
  }
  return out;
}

std::optional<std::uint16_t> DicomDataset::u16(std::uint32_t tag) const {
  const auto *e = find(tag);
  if (!e || e->value.size() < 2) return std::nullopt;
  return load_le<std::uint16_t>(e->value.data());
}

const std::vector<DicomDataset> &DicomDataset::sequence(std::uint32_t tag) const {
  static const std::vector<DicomDataset> empty;
  const auto *e = find(tag);
  return e ? e->items : empty;
}

DicomFile parse_dicom(std::span<const std::uint8_t> data) {
  DicomFile file;
  std::size_t pos = 0;
  const bool preamble = data.size() >= 132 && std::equal(data.begin() + 128, data.begin() + 132, "DICM");
  if (preamble) pos = 132;
  if (data.size() < pos + 8) fail("NotDicom", "file too short");

  const std::uint16_t first_group = load_le<std::uint16_t>(&data[pos]);
  if (first_group == 0x0002) {
    Parser meta_parser(data, true);
    pos = meta_parser.dataset(pos, data.size(), file.meta, false, 0x0002);
    file.transfer_syntax = file.meta.string(tags::TransferSyntaxUID).value_or(kImplicitLE);
  } else if (preamble) {
    file.transfer_syntax = kImplicitLE;
  } else {
    // Headerless stream: accept only plausible implicit-VR LE starts.
    const std::uint32_t len = load_le<std::uint32_t>(&data[pos + 4]);
    if (first_group != 0x0008 || len > data.size()) fail("NotDicom", "no DICM marker and no plausible dataset");
    file.transfer_syntax = kImplicitLE;
  }

  bool explicit_vr = false;
  if (file.transfer_syntax == kImplicitLE) {
    explicit_vr = false;
  } else if (file.transfer_syntax == kExplicitLE) {
    explicit_vr = true;
  } else if (file.transfer_syntax.rfind("1.2.840.10008.1.2.4", 0) == 0 || file.transfer_syntax == "1.2.840.10008.1.2.5") {
    fail("CompressedPixelDataUnsupported", "transfer syntax " + file.transfer_syntax);
  } else {
    fail("UnsupportedTransferSyntax", "transfer syntax " + file.transfer_syntax);
  }
  Parser parser(data, explicit_vr);
  parser.dataset(pos, data.size(), file.dataset, false);
  return file;
}

namespace {

struct Slice {
  DicomDataset ds;
  double position = 0.0;
  Vec3 ipp{};
};

std::vector<double> decode_pixels(const DicomDataset &ds, std::size_t count) {
  const auto *pd = ds.find(tags::PixelData);
  if (!pd) fail("InconsistentSeries", "slice without PixelData");
  const int bits = ds.u16(tags::BitsAllocated).value_or(16);
  const bool is_signed = ds.u16(tags::PixelRepresentation).value_or(0) == 1;
  if (ds.u16(tags::SamplesPerPixel).value_or(1) != 1) fail("InconsistentSeries", "only single-sample pixels supported");
  const std::size_t bytes = static_cast<std::size_t>(bits / 8);
  if (bits != 8 && bits != 16 && bits != 32) fail("InconsistentSeries", "BitsAllocated " + std::to_string(bits));
  if (pd->value.size() < count * bytes) fail("TruncatedData", "PixelData shorter than Rows*Columns");
  std::vector<double> out(count);
  const std::uint8_t *p = pd->value.data();
  for (std::size_t i = 0; i < count; ++i, p += bytes) {
    switch (bits) {
    case 8: out[i] = is_signed ? static_cast<double>(static_cast<std::int8_t>(*p)) : *p; break;
    case 16: out[i] = is_signed ? load_le<std::int16_t>(p) : load_le<std::uint16_t>(p); break;
    default: out[i] = is_signed ? load_le<std::int32_t>(p) : load_le<std::uint32_t>(p); break;
    }
  }
  double slope = 1.0, intercept = 0.0;
  if (auto s = ds.numbers(tags::RescaleSlope); !s.empty()) slope = s[0];
  if (auto b = ds.numbers(tags::RescaleIntercept); !b.empty()) intercept = b[0];
  if (slope != 1.0 || intercept != 0.0)
    for (auto &x : out) x = x * slope + intercept;
  return out;
}

ImageVolume assemble_series(std::vector<Slice> slices) {
  const DicomDataset &first = slices.front().ds;
  const auto rows = first.u16(tags::Rows), cols = first.u16(tags::Columns);
  const auto iop = first.numbers(tags::ImageOrientationPatient);
  const auto ps = first.numbers(tags::PixelSpacing);
  if (!rows || !cols || *rows == 0 || *cols == 0) fail("InconsistentSeries", "missing Rows/Columns");
  if (iop.size() != 6) fail("InconsistentSeries", "missing ImageOrientationPatient");
  if (ps.size() != 2) fail("InconsistentSeries", "missing PixelSpacing");

  for (const auto &s : slices) {
    if (s.ds.u16(tags::Rows) != rows || s.ds.u16(tags::Columns) != cols)
      fail("InconsistentSeries", "mixed Rows/Columns within series");
    const auto o = s.ds.numbers(tags::ImageOrientationPatient);
    if (o.size() != 6) fail("InconsistentSeries", "missing ImageOrientationPatient");
    for (std::size_t i = 0; i < 6; ++i)
      if (std::abs(o[i] - iop[i]) > 1e-4) fail("InconsistentSeries", "mixed orientation within series");
    const auto p = s.ds.numbers(tags::PixelSpacing);
    if (p.size() != 2 || std::abs(p[0] - ps[0]) > 1e-6 || std::abs(p[1] - ps[1]) > 1e-6)
      fail("InconsistentSeries", "mixed PixelSpacing within series");
  }

  Vec3 row_dir{iop[0], iop[1], iop[2]};
  Vec3 col_dir{iop[3], iop[4], iop[5]};
  row_dir = (1.0 / norm(row_dir)) * row_dir;
  col_dir = col_dir - dot(col_dir, row_dir) * row_dir;
  col_dir = (1.0 / norm(col_dir)) * col_dir;
  const Vec3 normal = cross(row_dir, col_dir);

  for (auto &s : slices) {
    const auto ipp = s.ds.numbers(tags::ImagePositionPatient);
    if (ipp.size() != 3) fail("InconsistentSeries", "missing ImagePositionPatient");
    s.ipp = {ipp[0], ipp[1], ipp[2]};
    s.position = dot(s.ipp, normal);
  }
  // Order is a function of the slice contents only.
  std::sort(slices.begin(), slices.end(), [](const Slice &a, const Slice &b) {
    const auto ka = std::make_tuple(a.position, a.ds.numbers(tags::InstanceNumber), a.ds.string(tags::SOPInstanceUID).value_or(""));
    const auto kb = std::make_tuple(b.position, b.ds.numbers(tags::InstanceNumber), b.ds.string(tags::SOPInstanceUID).value_or(""));
    return ka < kb;
  });

  double dz = 1.0;
  if (slices.size() > 1) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < slices.size(); ++i) gaps.push_back(slices[i].position - slices[i - 1].position);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t n = gaps.size();
    dz = n % 2 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
    if (!(dz > 1e-9)) fail("InconsistentSeries", "duplicate slice positions");
  } else if (auto t = first.numbers(tags::SliceThickness); !t.empty() && t[0] > 0) {
    dz = t[0];
  }

  Geometry g;
  g.dims = {*cols, *rows, slices.size()};
  g.spacing = {ps[1], ps[0], dz};
  g.origin = slices.front().ipp;
  for (int r = 0; r < 3; ++r) {
    g.direction(r, 0) = row_dir[static_cast<std::size_t>(r)];
    g.direction(r, 1) = col_dir[static_cast<std::size_t>(r)];
    g.direction(r, 2) = normal[static_cast<std::size_t>(r)];
  }
  g.validate();

  ImageVolume v(g);
  const std::size_t plane = g.dims[0] * g.dims[1];
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const auto px = decode_pixels(slices[k].ds, plane);
    std::copy(px.begin(), px.end(), v.voxels.begin() + static_cast<std::ptrdiff_t>(k * plane));
  }
  v.meta["Modality"] = first.string(tags::Modality).value_or("");
  v.meta["PatientID"] = first.string(tags::PatientID).value_or("");
  v.meta["SeriesInstanceUID"] = first.string(tags::SeriesInstanceUID).value_or("");
  return v;
}

} // namespace

std::vector<ImageVolume> read_dicom_series(const std::vector<std::filesystem::path> &inputs) {
  std::vector<std::filesystem::path> files;
  for (const auto &in : inputs) {
    if (std::filesystem::is_directory(in)) {
      for (const auto &entry : std::filesystem::directory_iterator(in))
        if (entry.is_regular_file()) files.push_back(entry.path());
    } else {
      files.push_back(in);
    }
  }
  std::map<std::pair<std::string, std::string>, std::vector<Slice>> series;
  for (const auto &f : files) {
    DicomFile parsed;
    try {
      parsed = parse_dicom(read_file(f));
    } catch (const Error &e) {
      if (e.kind() == "NotDicom") continue;
      throw;
    }
    if (!parsed.dataset.has(tags::PixelData)) continue;
    const auto key = std::make_pair(parsed.dataset.string(tags::PatientID).value_or(""),
                                    parsed.dataset.string(tags::SeriesInstanceUID).value_or(""));
    series[key].push_back(Slice{std::move(parsed.dataset), 0.0, {}});
  }
  if (series.empty()) fail("NoDicomFound", "no DICOM image files in the given inputs");
  std::vector<ImageVolume> out;
  for (auto &[key, slices] : series) out.push_back(assemble_series(std::move(slices)));
  return out;
}

LabelMask rasterize_rtstruct(const DicomDataset &rt, const Geometry &grid) {
  if (rt.string(tags::Modality).value_or("") != "RTSTRUCT") fail("NotRtStruct", "Modality is not RTSTRUCT");
  const auto &rois = rt.sequence(tags::StructureSetROISequence);
  const auto &contours = rt.sequence(tags::ROIContourSequence);
  if (contours.empty()) fail("NoContours", "ROIContourSequence is empty or absent");

  LabelMask mask(grid);
  bool any = false;
  for (std::size_t r = 0; r < rois.size(); ++r) {
    const auto label = static_cast<std::uint32_t>(r + 1);
    const auto number = rois[r].numbers(tags::ROINumber);
    mask.names[label] = rois[r].string(tags::ROIName).value_or("roi_" + std::to_string(label));
    if (number.empty()) continue;
    const DicomDataset *roi_contours = nullptr;
    for (const auto &c : contours) {
      const auto ref = c.numbers(tags::ReferencedROINumber);
      if (!ref.empty() && ref[0] == number[0]) roi_contours = &c;
    }
    if (!roi_contours) continue;

    std::map<std::size_t, std::vector<Polygon2>> per_slice;
    const auto &items = roi_contours->sequence(tags::ContourSequence);
    for (std::size_t ci = 0; ci < items.size(); ++ci) {
      const auto type = items[ci].string(tags::ContourGeometricType).value_or("CLOSED_PLANAR");
      if (type != "CLOSED_PLANAR") continue;
      const auto pts = items[ci].numbers(tags::ContourData);
      if (pts.size() < 9 || pts.size() % 3 != 0) continue;
      Polygon2 poly;
      double k_sum = 0.0;
      for (std::size_t p = 0; p < pts.size(); p += 3) {
        const Vec3 idx = grid.physical_to_index({pts[p], pts[p + 1], pts[p + 2]});
        poly.emplace_back(idx[0], idx[1]);
        k_sum += idx[2];
      }
      const double k = k_sum / static_cast<double>(poly.size());
      const double nearest = std::round(k);
      if (nearest < 0 || nearest > static_cast<double>(grid.dims[2] - 1) || std::abs(k - nearest) > 0.5 + 1e-9)
        fail("SliceMatchFailed", "ROI '" + mask.names[label] + "' contour " + std::to_string(ci) +
                                     " is not within half a slice of any reference slice");
      per_slice[static_cast<std::size_t>(nearest)].push_back(std::move(poly));
    }
    for (const auto &[k, polys] : per_slice) {
      any = true;
      even_odd_fill(polys, grid.dims[0], grid.dims[1], [&](std::size_t i, std::size_t j) { mask.at(i, j, k) = label; });
    }
  }
  if (!any) fail("NoContours", "structure set holds no closed planar contours");
  return mask;
}

LabelMask read_rtstruct(const std::filesystem::path &rt_path, const ImageVolume &reference) {
  const DicomFile f = parse_dicom(read_file(rt_path));
  return rasterize_rtstruct(f.dataset, reference.geometry);
}

} // namespace voxflow::io

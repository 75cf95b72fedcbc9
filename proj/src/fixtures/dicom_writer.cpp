#include "voxflow/fixtures/dicom_writer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "voxflow/core/error.hpp"
#include "voxflow/core/table.hpp"
#include "voxflow/io/dicom.hpp"

namespace voxflow::fixtures {

namespace {

using io::Bytes;
using io::store_le;

struct Node {
  std::string vr;
  Bytes value;
  std::vector<std::vector<std::pair<std::uint32_t, Node>>> items;
};
using Dataset = std::vector<std::pair<std::uint32_t, Node>>;

Node text(const std::string &vr, std::string s) {
  if (s.size() % 2) s.push_back(vr == "UI" ? '\0' : ' ');
  return Node{vr, Bytes(s.begin(), s.end()), {}};
}

Node u16(std::uint16_t v) {
  Bytes b;
  store_le(b, v);
  return Node{"US", b, {}};
}

Node ds_list(const std::vector<double> &values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += '\\';
    s += format_number(values[i]);
  }
  return text("DS", s);
}

bool long_vr(const std::string &vr) {
  return vr == "OB" || vr == "OW" || vr == "SQ" || vr == "UN" || vr == "UT";
}

void encode(Bytes &out, const Dataset &ds, bool explicit_vr);

void encode_element(Bytes &out, std::uint32_t tag, const Node &n, bool explicit_vr) {
  store_le(out, static_cast<std::uint16_t>(tag >> 16));
  store_le(out, static_cast<std::uint16_t>(tag & 0xFFFF));
  const bool seq = n.vr == "SQ";
  if (explicit_vr) {
    out.push_back(static_cast<std::uint8_t>(n.vr[0]));
    out.push_back(static_cast<std::uint8_t>(n.vr[1]));
    if (long_vr(n.vr)) {
      store_le(out, std::uint16_t{0});
      store_le(out, seq ? 0xFFFFFFFFu : static_cast<std::uint32_t>(n.value.size()));
    } else {
      store_le(out, static_cast<std::uint16_t>(n.value.size()));
    }
  } else {
    store_le(out, seq ? 0xFFFFFFFFu : static_cast<std::uint32_t>(n.value.size()));
  }
  if (!seq) {
    out.insert(out.end(), n.value.begin(), n.value.end());
    return;
  }
  for (const auto &item : n.items) {
    // First item uses an undefined length, later items explicit lengths.
    Bytes body;
    encode(body, item, explicit_vr);
    store_le(out, std::uint16_t{0xFFFE});
    store_le(out, std::uint16_t{0xE000});
    if (&item - n.items.data() == 0) {
      store_le(out, 0xFFFFFFFFu);
      out.insert(out.end(), body.begin(), body.end());
      store_le(out, std::uint16_t{0xFFFE});
      store_le(out, std::uint16_t{0xE00D});
      store_le(out, std::uint32_t{0});
    } else {
      store_le(out, static_cast<std::uint32_t>(body.size()));
      out.insert(out.end(), body.begin(), body.end());
    }
  }
  store_le(out, std::uint16_t{0xFFFE});
  store_le(out, std::uint16_t{0xE0DD});
  store_le(out, std::uint32_t{0});
}

void encode(Bytes &out, const Dataset &ds, bool explicit_vr) {
  Dataset sorted = ds;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
  for (const auto &[tag, node] : sorted) encode_element(out, tag, node, explicit_vr);
}

Bytes file_bytes(const Dataset &ds, const std::string &sop_class, bool explicit_vr, bool preamble) {
  Bytes out;
  const std::string ts = explicit_vr ? "1.2.840.10008.1.2.1" : "1.2.840.10008.1.2";
  if (preamble) {
    out.assign(128, 0);
    out.insert(out.end(), {'D', 'I', 'C', 'M'});
    Dataset meta = {{io::dicom_tag(0x0002, 0x0002), text("UI", sop_class)}, {io::tags::TransferSyntaxUID, text("UI", ts)}};
    Bytes meta_body;
    encode(meta_body, meta, true);
    Bytes len;
    store_le(len, static_cast<std::uint32_t>(meta_body.size()));
    encode_element(out, io::dicom_tag(0x0002, 0x0000), Node{"UL", len, {}}, true);
    out.insert(out.end(), meta_body.begin(), meta_body.end());
  } else if (explicit_vr) {
    fail("UnsupportedFormat", "headerless streams are implicit VR by definition");
  }
  encode(out, ds, explicit_vr);
  return out;
}

} // namespace

io::Bytes encode_dicom_slice(const ImageVolume &v, std::size_t k, const DicomSeriesInfo &info, int instance_number) {
  const Geometry &g = v.geometry;
  const Vec3 ipp = g.index_to_physical({0, 0, static_cast<double>(k)});
  Bytes pixels;
  pixels.reserve(g.dims[0] * g.dims[1] * 2);
  for (std::size_t j = 0; j < g.dims[1]; ++j)
    for (std::size_t i = 0; i < g.dims[0]; ++i) {
      const double stored = std::round((v.at(i, j, k) - info.rescale_intercept) / info.rescale_slope);
      store_le(pixels, static_cast<std::int16_t>(std::clamp(stored, -32768.0, 32767.0)));
    }
  const std::string sop = info.series_uid + "." + std::to_string(instance_number);
  Dataset ds = {
      {io::tags::SOPInstanceUID, text("UI", sop)},
      {io::tags::Modality, text("CS", info.modality)},
      {io::tags::PatientID, text("LO", info.patient_id)},
      {io::tags::SeriesInstanceUID, text("UI", info.series_uid)},
      {io::tags::InstanceNumber, text("IS", std::to_string(instance_number))},
      {io::tags::ImagePositionPatient, ds_list({ipp[0], ipp[1], ipp[2]})},
      {io::tags::ImageOrientationPatient,
       ds_list({g.direction(0, 0), g.direction(1, 0), g.direction(2, 0), g.direction(0, 1), g.direction(1, 1),
                g.direction(2, 1)})},
      {io::tags::SamplesPerPixel, u16(1)},
      {io::tags::Rows, u16(static_cast<std::uint16_t>(g.dims[1]))},
      {io::tags::Columns, u16(static_cast<std::uint16_t>(g.dims[0]))},
      {io::tags::PixelSpacing, ds_list({g.spacing[1], g.spacing[0]})},
      {io::tags::BitsAllocated, u16(16)},
      {io::dicom_tag(0x0028, 0x0101), u16(16)},
      {io::tags::PixelRepresentation, u16(1)},
      {io::tags::RescaleIntercept, ds_list({info.rescale_intercept})},
      {io::tags::RescaleSlope, ds_list({info.rescale_slope})},
      {io::tags::PixelData, Node{"OW", pixels, {}}},
  };
  return file_bytes(ds, "1.2.840.10008.5.1.4.1.1.2", info.explicit_vr, info.preamble);
}

std::vector<std::filesystem::path> write_dicom_series(const ImageVolume &v, const std::filesystem::path &dir,
                                                      const DicomSeriesInfo &info, const std::string &stem) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t k = 0; k < v.geometry.dims[2]; ++k) {
    auto p = dir / (stem + "_" + std::to_string(k) + ".dcm");
    io::write_file(p, encode_dicom_slice(v, k, info, static_cast<int>(k + 1)));
    paths.push_back(p);
  }
  return paths;
}

io::Bytes encode_rtstruct(const std::vector<RtRoi> &rois, const std::string &patient_id, bool explicit_vr) {
  Node ss_rois{"SQ", {}, {}};
  Node roi_contours{"SQ", {}, {}};
  for (const auto &roi : rois) {
    ss_rois.items.push_back({{io::tags::ROINumber, text("IS", std::to_string(roi.number))},
                             {io::tags::ROIName, text("LO", roi.name)}});
    Node contour_seq{"SQ", {}, {}};
    for (const auto &c : roi.contours) {
      std::vector<double> flat;
      for (const auto &p : c.points) flat.insert(flat.end(), p.begin(), p.end());
      contour_seq.items.push_back({{io::tags::ContourGeometricType, text("CS", "CLOSED_PLANAR")},
                                   {io::tags::NumberOfContourPoints, text("IS", std::to_string(c.points.size()))},
                                   {io::tags::ContourData, ds_list(flat)}});
    }
    roi_contours.items.push_back({{io::tags::ContourSequence, contour_seq},
                                  {io::tags::ReferencedROINumber, text("IS", std::to_string(roi.number))}});
  }
  Dataset ds = {
      {io::tags::SOPInstanceUID, text("UI", "1.2.826.0.1.3680043.10.99.1")},
      {io::tags::Modality, text("CS", "RTSTRUCT")},
      {io::tags::PatientID, text("LO", patient_id)},
      {io::tags::StructureSetROISequence, ss_rois},
      {io::tags::ROIContourSequence, roi_contours},
  };
  return file_bytes(ds, "1.2.840.10008.5.1.4.1.1.481.3", explicit_vr, true);
}

} // namespace voxflow::fixtures

#pragma once

// Ground-truth data model: angular BFOV annotations, pixel boxes on the
// equirectangular frame, and the dataset JSON format.

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "panodet/geometry.hpp"
#include "panodet/image.hpp"

namespace panodet {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Object annotated in a centered perspective view: angular center plus
/// angular extents.
struct Bfov {
  std::string label;
  SphereCoord center;
  double extent_lat = 0.0;
  double extent_lon = 0.0;

  friend bool operator==(const Bfov&, const Bfov&) = default;
};

/// Axis-aligned box on the ERA frame. cx lies in [0, width); a box whose
/// horizontal span crosses the lon = +-pi seam has wraps = true.
struct EraBox {
  std::string label;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool wraps = false;

  double left() const noexcept { return cx - w / 2.0; }
  double right() const noexcept { return cx + w / 2.0; }
  double top() const noexcept { return cy - h / 2.0; }
  double bottom() const noexcept { return cy + h / 2.0; }

  friend bool operator==(const EraBox&, const EraBox&) = default;
};

/// Normalizes cx into [0, width) and derives the wrap flag.
EraBox make_era_box(std::string label, double cx, double cy, double w, double h, ImageDims dims);

/// Wrap-aware axis-aligned hull of ERA points. The horizontal span is the
/// shortest arc of the cylinder containing every x. Enclosed poles stretch
/// the hull to the full width and the matching image edge.
EraBox era_hull(std::string label, std::span<const PixelCoord> points, ImageDims dims,
                bool encloses_north = false, bool encloses_south = false);

inline constexpr int kPerimeterSamplesPerEdge = 64;

/// Points along the border of a pixel rectangle, samples_per_edge per edge
/// (corners included).
std::vector<PixelCoord> rectangle_perimeter(double x, double y, double w, double h,
                                            int samples_per_edge = kPerimeterSamplesPerEdge);

/// Perspective view centered on the BFOV whose field of view equals its
/// extents; the border of this view is the annotated box.
WindowSpec bfov_view(const Bfov& b);

/// Sphere directions along the BFOV border.
std::vector<SphereCoord> bfov_perimeter(const Bfov& b,
                                        int samples_per_edge = kPerimeterSamplesPerEdge);

EraBox bfov_to_erabox(const Bfov& b, ImageDims dims);

enum class EntrySource { bfov_derived, corrected };

struct GroundTruth {
  std::variant<Bfov, EraBox> shape;
  EntrySource source = EntrySource::bfov_derived;

  const std::string& label() const noexcept;
  bool is_bfov() const noexcept { return std::holds_alternative<Bfov>(shape); }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// BFOV entries go through bfov_to_erabox; box entries are used verbatim.
EraBox ground_truth_box(const GroundTruth& gt, ImageDims dims);

struct FrameAnnotations {
  std::string id;
  ImageDims dims;
  std::vector<GroundTruth> objects;

  friend bool operator==(const FrameAnnotations&, const FrameAnnotations&) = default;
};

struct Dataset {
  /// Declared class vocabulary; empty means undeclared.
  std::vector<std::string> classes;
  std::vector<FrameAnnotations> frames;
  /// Non-fatal diagnostics gathered while parsing (unknown labels).
  std::vector<std::string> warnings;

  const FrameAnnotations* find(const std::string& id) const;
};

Dataset parse_dataset(const std::filesystem::path& path);
Dataset parse_dataset_text(const std::string& text);
std::string write_dataset_text(const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);

// Degrees for output: the 6-decimal rounding when it maps back to the same
// radians, otherwise the nearest double that does.
double degrees_for_output(double radians);

std::string_view to_string(EntrySource s) noexcept;

}  // namespace panodet

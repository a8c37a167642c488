#pragma once

// JSON mappings for the on-disk and on-wire formats. Angles are degrees in
// JSON and radians everywhere else.

#include <string>
#include <vector>

#include <json.hpp>

#include "panodet/annotations.hpp"
#include "panodet/geometry.hpp"

namespace panodet {

using json = nlohmann::json;

/// Walks a JSON document while tracking the JSON pointer of the current node
/// so schema violations name the offending field.
class JsonCursor {
 public:
  JsonCursor(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const json& node() const noexcept { return *node_; }
  const std::string& path() const noexcept { return path_; }

  bool has(const char* key) const;
  JsonCursor at(const char* key) const;
  JsonCursor at(std::size_t index) const;
  std::size_t array_size() const;

  std::string string() const;
  double number() const;
  int integer() const;
  bool boolean() const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  const json* node_;
  std::string path_;
};

/// Parses text, rethrowing syntax errors as SchemaError with line and column.
json parse_json_text(const std::string& text, const std::string& source_name);

json frame_to_json(const FrameAnnotations& f);
FrameAnnotations frame_from_json(const JsonCursor& c);

json era_box_fields(const EraBox& b);
EraBox era_box_from_fields(const JsonCursor& c, std::string label);

json window_spec_to_json(const WindowSpec& w);
WindowSpec window_spec_from_json(const JsonCursor& c);

json plan_to_json(const std::vector<WindowSpec>& plan);
std::vector<WindowSpec> plan_from_json(const JsonCursor& c);
std::vector<WindowSpec> read_plan(const std::string& path);

}  // namespace panodet

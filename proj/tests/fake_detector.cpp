// Line-protocol detector used by the tests.
//
//   fake_detector <fixture.json>   answer every request with the fixture list
//   fake_detector --size           one "frame" box covering the decoded PNG
//   fake_detector --wrong-id       answer with a mismatched id
//   fake_detector --garbage        answer with a non-JSON line
//   fake_detector --quit           exit without answering

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "panodet/detectors.hpp"
#include "panodet/json_io.hpp"

int main(int argc, char** argv) {
  using panodet::json;
  if (argc != 2) return 2;
  const std::string mode = argv[1];
  json fixture = json::array();
  if (mode.rfind("--", 0) != 0) {
    std::ifstream in(mode);
    std::stringstream ss;
    ss << in.rdbuf();
    fixture = json::parse(ss.str());
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "--quit") return 0;
    const json req = json::parse(line);
    const int id = req.at("id").get<int>();
    if (mode == "--garbage") {
      std::cout << "not json" << std::endl;
      continue;
    }
    json reply{{"id", mode == "--wrong-id" ? id + 100 : id}, {"detections", fixture}};
    if (mode == "--size") {
      const auto png = panodet::base64_decode(req.at("png_b64").get<std::string>());
      const panodet::Raster r = panodet::decode_png(png);
      reply["detections"] = json::array({{{"label", "frame"}, {"score", 1.0}, {"x", 0}, {"y", 0},
                                          {"w", r.width()}, {"h", r.height()}}});
    }
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}

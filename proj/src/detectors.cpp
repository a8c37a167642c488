#include "panodet/detectors.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "panodet/json_io.hpp"

namespace panodet {

namespace {

constexpr int kResponseTimeoutMs = 120'000;

WindowDetection window_detection_from_json(const JsonCursor& c) {
  WindowDetection d;
  d.label = c.at("label").string();
  d.score = c.at("score").number();
  d.rect = {c.at("x").number(), c.at("y").number(), c.at("w").number(), c.at("h").number()};
  return d;
}

}  // namespace

// ---------------------------------------------------------------- stub

StubDetector StubDetector::from_json_text(const std::string& text) {
  const json doc = parse_json_text(text, "stub fixture");
  const JsonCursor windows = JsonCursor(doc, "").at("windows");
  std::map<int, std::vector<WindowDetection>> per_window;
  for (std::size_t k = 0; k < windows.array_size(); ++k) {
    const JsonCursor list = windows.at(k);
    auto& out = per_window[static_cast<int>(k)];
    for (std::size_t i = 0; i < list.array_size(); ++i) {
      out.push_back(window_detection_from_json(list.at(i)));
    }
  }
  return StubDetector(std::move(per_window));
}

std::vector<WindowDetection> StubDetector::detect(const WindowImage&, int window_index) {
  auto it = per_window_.find(window_index);
  return it == per_window_.end() ? std::vector<WindowDetection>{} : it->second;
}

// ---------------------------------------------------------------- oracle

ObjectOutline object_outline(const GroundTruth& gt, ImageDims dims) {
  ObjectOutline out;
  if (const auto* b = std::get_if<Bfov>(&gt.shape)) {
    out.center = b->center;
    out.border = bfov_perimeter(*b);
    return out;
  }
  const EraBox& box = std::get<EraBox>(gt.shape);
  out.center = era_pixel_to_sphere(dims, {box.cx, box.cy});
  for (const auto& px : rectangle_perimeter(box.left(), box.top(), box.w, box.h)) {
    out.border.push_back(era_pixel_to_sphere(dims, px));
  }
  return out;
}

std::optional<WindowRect> project_outline(const ObjectOutline& outline, const WindowSpec& spec) {
  const WindowFrame frame(spec);
  const WindowHit c = frame.to_pixel(outline.center);
  if (!c.visible) return std::nullopt;
  double x0 = c.px.x, x1 = c.px.x, y0 = c.px.y, y1 = c.px.y;
  for (const auto& s : outline.border) {
    const WindowHit hit = frame.to_pixel(s);
    if (!hit.visible) continue;
    x0 = std::min(x0, hit.px.x);
    x1 = std::max(x1, hit.px.x);
    y0 = std::min(y0, hit.px.y);
    y1 = std::max(y1, hit.px.y);
  }
  x0 = std::clamp(x0, 0.0, static_cast<double>(spec.out_w));
  x1 = std::clamp(x1, 0.0, static_cast<double>(spec.out_w));
  y0 = std::clamp(y0, 0.0, static_cast<double>(spec.out_h));
  y1 = std::clamp(y1, 0.0, static_cast<double>(spec.out_h));
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return WindowRect{x0, y0, x1 - x0, y1 - y0};
}

OracleDetector::OracleDetector(FrameAnnotations truth, double score)
    : truth_(std::move(truth)), score_(score) {}

std::vector<WindowDetection> OracleDetector::detect(const WindowImage& window, int) {
  std::vector<WindowDetection> out;
  for (const auto& gt : truth_.objects) {
    if (auto rect = project_outline(object_outline(gt, truth_.dims), window.spec)) {
      out.push_back({gt.label(), score_, *rect});
    }
  }
  return out;
}

// ---------------------------------------------------------------- protocol

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw std::invalid_argument("invalid base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string detector_request_line(int id, const Raster& raster) {
  const json req = {{"id", id},
                    {"width", raster.width()},
                    {"height", raster.height()},
                    {"png_b64", base64_encode(encode_png(raster))}};
  return req.dump();
}

std::vector<WindowDetection> parse_detector_response(const std::string& line, int expected_id) {
  try {
    const json doc = parse_json_text(line, "detector response");
    const JsonCursor root(doc, "");
    const int id = root.at("id").integer();
    if (id != expected_id) {
      root.at("id").fail("response id " + std::to_string(id) + " does not match request " +
                         std::to_string(expected_id));
    }
    std::vector<WindowDetection> out;
    const JsonCursor dets = root.at("detections");
    for (std::size_t i = 0; i < dets.array_size(); ++i) {
      out.push_back(window_detection_from_json(dets.at(i)));
    }
    return out;
  } catch (const SchemaError& e) {
    throw DetectorError(DetectorError::Kind::malformed_output, e.what());
  }
}

// ---------------------------------------------------------------- child process

ExternalProcessDetector::ExternalProcessDetector(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
  if (argv_.empty()) throw std::invalid_argument("external detector needs a program");
  start();
}

ExternalProcessDetector::~ExternalProcessDetector() { stop(); }

void ExternalProcessDetector::start() {
  int in_pair[2];
  int out_pair[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0) {
    throw DetectorError(DetectorError::Kind::unavailable, std::string("socketpair: ") + std::strerror(errno));
  }
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, out_pair) != 0) {
    ::close(in_pair[0]);
    ::close(in_pair[1]);
    throw DetectorError(DetectorError::Kind::unavailable, std::string("socketpair: ") + std::strerror(errno));
  }
  // Pipe used by the child to report a failed exec.
  int status_pipe[2];
  if (pipe2(status_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pair[0], in_pair[1], out_pair[0], out_pair[1]}) ::close(fd);
    throw DetectorError(DetectorError::Kind::unavailable, std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pair[0], in_pair[1], out_pair[0], out_pair[1], status_pipe[0], status_pipe[1]}) ::close(fd);
    throw DetectorError(DetectorError::Kind::unavailable, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in_pair[1], STDIN_FILENO);
    ::dup2(out_pair[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(in_pair[1]);
  ::close(out_pair[1]);
  ::close(status_pipe[1]);
  int err = 0;
  const auto n = ::read(status_pipe[0], &err, sizeof err);
  ::close(status_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof err)) {
    ::close(in_pair[0]);
    ::close(out_pair[0]);
    ::waitpid(pid, nullptr, 0);
    throw DetectorError(DetectorError::Kind::unavailable,
                        "cannot start " + argv_[0] + ": " + std::strerror(err));
  }
  pid_ = pid;
  to_child_ = in_pair[0];
  from_child_ = out_pair[0];
}

void ExternalProcessDetector::stop() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // The child exits on closed input; give it a moment before forcing.
    for (int i = 0; i < 200; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::string ExternalProcessDetector::exchange(const std::string& line) {
  if (to_child_ < 0) throw DetectorError(DetectorError::Kind::unavailable, "detector process is not running");
  const std::string msg = line + "\n";
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const auto n = ::send(to_child_, msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DetectorError(DetectorError::Kind::unavailable,
                          std::string("detector write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  for (;;) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return reply;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, kResponseTimeoutMs);
    if (ready == 0) throw DetectorError(DetectorError::Kind::unavailable, "detector timed out");
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw DetectorError(DetectorError::Kind::unavailable, std::string("poll: ") + std::strerror(errno));
    }
    char buf[65536];
    const auto n = ::read(from_child_, buf, sizeof buf);
    if (n == 0) throw DetectorError(DetectorError::Kind::unavailable, "detector process exited");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DetectorError(DetectorError::Kind::unavailable, std::string("read: ") + std::strerror(errno));
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

std::vector<WindowDetection> ExternalProcessDetector::detect(const WindowImage& window, int) {
  std::lock_guard lock(mu_);
  const int id = next_id_++;
  return parse_detector_response(exchange(detector_request_line(id, window.raster)), id);
}

// ---------------------------------------------------------------- factory

std::unique_ptr<DetectorPort> make_detector(const std::string& spec, const FrameAnnotations* truth) {
  if (spec == "stub") return std::make_unique<StubDetector>();
  if (spec.starts_with("stub:")) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw DetectorError(DetectorError::Kind::unavailable, "cannot open stub fixture " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<StubDetector>(StubDetector::from_json_text(ss.str()));
  }
  if (spec == "oracle") {
    if (truth == nullptr) {
      throw DetectorError(DetectorError::Kind::unavailable, "oracle detector needs ground truth");
    }
    return std::make_unique<OracleDetector>(*truth);
  }
  if (spec.starts_with("exec:")) {
    std::istringstream words(spec.substr(5));
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    return std::make_unique<ExternalProcessDetector>(std::move(argv));
  }
  throw std::invalid_argument("unknown detector '" + spec + "' (expected stub, stub:<file>, oracle, exec:<path>)");
}

}  // namespace panodet

#include "hector/frame_source.hpp"

#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cmath>

#include "hector/image_io.hpp"

namespace hector {

namespace fs = std::filesystem;

SyntheticSource::SyntheticSource(SynthSpec spec) : stream_(std::move(spec)) {}

std::optional<Frame> SyntheticSource::next() {
  if (cursor_ >= stream_.frame_count()) return std::nullopt;
  return stream_.render(cursor_++);
}

std::string SyntheticSource::descriptor() const { return "synth:" + format_synth_spec(stream_.spec()); }

ImageDirectorySource::ImageDirectorySource(const fs::path& dir, double fps) : dir_(dir), fps_(fps) {
  static const std::vector<std::string> kExtensions = {".png", ".jpg", ".jpeg", ".bmp", ".ppm"};
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (entry.is_regular_file() &&
        std::find(kExtensions.begin(), kExtensions.end(), ext) != kExtensions.end()) {
      files_.push_back(entry.path());
    }
  }
  if (ec) throw SourceUnavailable("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files_.begin(), files_.end());
}

std::optional<Frame> ImageDirectorySource::next() {
  if (cursor_ >= files_.size()) return std::nullopt;
  const auto index = cursor_++;
  return read_image(files_[index], index, std::llround(index * 1000.0 / fps_));
}

struct VideoFileSource::Impl {
  cv::VideoCapture capture;
  double fps = 25.0;
};

VideoFileSource::VideoFileSource(const fs::path& path) : path_(path), impl_(std::make_unique<Impl>()) {
  if (!impl_->capture.open(path.string())) {
    throw SourceUnavailable("cannot open video " + path.string());
  }
  const double fps = impl_->capture.get(cv::CAP_PROP_FPS);
  if (fps > 0.0 && std::isfinite(fps)) impl_->fps = fps;
}

VideoFileSource::~VideoFileSource() = default;

std::optional<Frame> VideoFileSource::next() {
  cv::Mat bgr;
  if (!impl_->capture.read(bgr) || bgr.empty()) return std::nullopt;
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  const auto index = cursor_++;
  return Frame(index, std::llround(static_cast<double>(index) * 1000.0 / impl_->fps), rgb.cols,
               rgb.rows, std::vector<std::uint8_t>(rgb.data, rgb.data + rgb.total() * 3));
}

std::unique_ptr<FrameSource> open_source(const std::string& descriptor,
                                         std::optional<std::uint64_t> model_seed) {
  if (descriptor.rfind("synth:", 0) == 0) {
    const std::string text = descriptor.substr(6);
    try {
      SynthSpec spec = parse_synth_spec(text);
      if (model_seed && text.find("model=") == std::string::npos) spec.model_seed = *model_seed;
      return std::make_unique<SyntheticSource>(std::move(spec));
    } catch (const DomainError& e) {
      throw SourceUnavailable(std::string("bad synthetic source: ") + e.what());
    }
  }
  const fs::path path(descriptor);
  std::error_code ec;
  if (fs::is_directory(path, ec)) return std::make_unique<ImageDirectorySource>(path);
  if (!fs::is_regular_file(path, ec)) throw SourceUnavailable("no such source: " + descriptor);
  return std::make_unique<VideoFileSource>(path);
}

}  // namespace hector

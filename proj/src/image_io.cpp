#include "hector/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <stdexcept>

namespace hector {

void write_png(const std::filesystem::path& path, const Frame& frame) {
  cv::Mat rgb(frame.height(), frame.width(), CV_8UC3,
              const_cast<std::uint8_t*>(frame.pixels().data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) {
    throw std::runtime_error("cannot write PNG " + path.string());
  }
}

Frame read_image(const std::filesystem::path& path, std::uint64_t index, std::int64_t timestamp_ms) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw std::runtime_error("cannot decode image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  std::vector<std::uint8_t> px(rgb.data, rgb.data + rgb.total() * 3);
  return Frame(index, timestamp_ms, rgb.cols, rgb.rows, std::move(px));
}

}  // namespace hector

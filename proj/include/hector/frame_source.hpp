#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hector/domain.hpp"
#include "hector/synth.hpp"

namespace hector {

class SourceUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where frames enter the pipeline. A capture card would implement this too.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Frame> next() = 0;
  /// Live sources cannot wait for the pipeline, so overflow drops frames;
  /// recorded sources apply back-pressure instead.
  virtual bool live() const = 0;
  /// Pacing rate in frames per second, 0 for as fast as possible.
  virtual double fps() const = 0;
  virtual std::string descriptor() const = 0;
};

class SyntheticSource : public FrameSource {
 public:
  explicit SyntheticSource(SynthSpec spec);
  std::optional<Frame> next() override;
  bool live() const override { return stream_.spec().fps > 0.0; }
  double fps() const override { return stream_.spec().fps; }
  std::string descriptor() const override;
  const SynthStream& stream() const { return stream_; }

 private:
  SynthStream stream_;
  int cursor_ = 0;
};

/// A directory of still images, read in file-name order.
class ImageDirectorySource : public FrameSource {
 public:
  explicit ImageDirectorySource(const std::filesystem::path& dir, double fps = 25.0);
  std::optional<Frame> next() override;
  bool live() const override { return false; }
  double fps() const override { return 0.0; }
  std::string descriptor() const override { return dir_.string(); }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  double fps_;
  std::size_t cursor_ = 0;
};

/// A container file decoded by OpenCV.
class VideoFileSource : public FrameSource {
 public:
  explicit VideoFileSource(const std::filesystem::path& path);
  ~VideoFileSource() override;
  std::optional<Frame> next() override;
  bool live() const override { return false; }
  double fps() const override { return 0.0; }
  std::string descriptor() const override { return path_.string(); }

 private:
  struct Impl;
  std::filesystem::path path_;
  std::unique_ptr<Impl> impl_;
  std::uint64_t cursor_ = 0;
};

/// "synth:<spec>", an image directory, or a video file.
/// `model_seed` fills in the synthetic generator's model when the synth
/// descriptor omits it. Throws SourceUnavailable.
std::unique_ptr<FrameSource> open_source(const std::string& descriptor,
                                         std::optional<std::uint64_t> model_seed = std::nullopt);

}  // namespace hector

#pragma once

// Bridges to an external classifier that scores images.

#include <chrono>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dermfuse/labels.hpp"
#include "dermfuse/raster.hpp"

namespace dermfuse::explain {

class PredictionProvider {
 public:
  virtual ~PredictionProvider() = default;
  // One probability pair per image, same order.
  virtual std::vector<ClassProbs> predict(std::span<const RasterImage> images) = 0;
};

// In-process provider backed by a callable; used by tests and the Python bindings.
class CallbackProvider : public PredictionProvider {
 public:
  using Fn = std::function<std::vector<ClassProbs>(std::span<const RasterImage>)>;
  explicit CallbackProvider(Fn fn) : fn_(std::move(fn)) {}
  std::vector<ClassProbs> predict(std::span<const RasterImage> images) override {
    return fn_(images);
  }

 private:
  Fn fn_;
};

// File-based batch protocol. For each batch a request directory is created holding
// numbered PNGs and `manifest.csv` (`index,image_file`). The command runs as
// `/bin/sh -c '<command> "$1"' sh <dir>` and must exit 0 after writing
// `predictions.csv` (`index,p_benign,p_malignant`) into the same directory.
class ExternalProvider : public PredictionProvider {
 public:
  struct Options {
    std::chrono::milliseconds timeout{120'000};
    // Parent for request directories; the system temp directory when empty.
    std::filesystem::path work_root;
    bool keep_requests = false;
  };

  explicit ExternalProvider(std::string command) : ExternalProvider(std::move(command), Options{}) {}
  ExternalProvider(std::string command, Options options);

  std::vector<ClassProbs> predict(std::span<const RasterImage> images) override;

  std::size_t batches_sent() const { return batches_; }

 private:
  std::string command_;
  Options options_;
  std::size_t batches_ = 0;
};

// Calls the provider and validates the reply: one pair per image, each pair a valid
// probability distribution within 1e-6. Empty input returns without calling the provider.
// Throws ProtocolError on a malformed reply.
std::vector<ClassProbs> predict_batch(PredictionProvider& provider,
                                      std::span<const RasterImage> images);

// Parses a `predictions.csv` reply for a batch of `expected` images.
std::vector<ClassProbs> parse_provider_reply(std::string_view contents, std::size_t expected,
                                             std::string_view source);

}  // namespace dermfuse::explain

#include "dermfuse/provider.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <thread>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dermfuse/error.hpp"
#include "dermfuse/image_io.hpp"
#include "dermfuse/predictions.hpp"
#include "dermfuse/textio.hpp"

extern char** environ;

namespace dermfuse::explain {

namespace {

const std::vector<std::string> kReplyHeader = {"index", "p_benign", "p_malignant"};

std::string image_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", index);
  return buf;
}

// Removes the request directory on scope exit unless asked to keep it.
class RequestDir {
 public:
  RequestDir(const std::filesystem::path& root, bool keep) : keep_(keep) {
    auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
    std::filesystem::create_directories(base);
    std::string tmpl = (base / "dermfuse-request-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) {
      throw IoError("cannot create request directory under " + base.string() + ": " +
                    std::strerror(errno));
    }
    path_ = tmpl;
  }
  ~RequestDir() {
    if (keep_) return;
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  RequestDir(const RequestDir&) = delete;
  RequestDir& operator=(const RequestDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool keep_;
};

// Exit status of the command, or nullopt on timeout (the process group is killed).
std::optional<int> run_with_timeout(const std::string& command, const std::string& arg,
                                    std::chrono::milliseconds timeout) {
  const std::string script = command + " \"$1\"";
  std::vector<std::string> argv_store = {"/bin/sh", "-c", script, "sh", arg};
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", nullptr, &attr, argv.data(), environ);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw TransportError(std::string("cannot start provider: ") + std::strerror(rc));

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto pause = std::chrono::milliseconds(1);
  while (true) {
    int status = 0;
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) {
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }
    if (done < 0 && errno != EINTR) {
      throw TransportError(std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return std::nullopt;
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(50));
  }
}

}  // namespace

ExternalProvider::ExternalProvider(std::string command, Options options)
    : command_(std::move(command)), options_(std::move(options)) {
  if (command_.empty()) throw ConfigError("provider command is empty");
}

std::vector<ClassProbs> ExternalProvider::predict(std::span<const RasterImage> images) {
  const auto batch = batches_++;
  const std::string context = "provider batch " + std::to_string(batch) + " (" +
                              std::to_string(images.size()) + " images)";
  RequestDir dir(options_.work_root, options_.keep_requests);

  std::string manifest = "index,image_file\n";
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto name = image_name(i);
    write_png(dir.path() / name, images[i]);
    manifest += std::to_string(i) + ',' + name + '\n';
  }
  textio::write_file_atomic(dir.path() / "manifest.csv", manifest);

  const auto status = run_with_timeout(command_, dir.path().string(), options_.timeout);
  if (!status) {
    throw ProviderTimeout(context + ": timed out after " +
                          std::to_string(options_.timeout.count()) + " ms");
  }
  if (*status != 0) {
    throw ProviderExitError(context + ": provider exited with status " + std::to_string(*status),
                            *status);
  }
  const auto reply_path = dir.path() / "predictions.csv";
  std::string reply;
  try {
    reply = textio::read_file(reply_path);
  } catch (const IoError&) {
    throw ProtocolError(context + ": provider wrote no predictions.csv");
  }
  try {
    return parse_provider_reply(reply, images.size(), reply_path.string());
  } catch (const ProtocolError& e) {
    throw ProtocolError(context + ": " + e.what());
  }
}

std::vector<ClassProbs> parse_provider_reply(std::string_view contents, std::size_t expected,
                                             std::string_view source) {
  textio::Table table;
  try {
    table = textio::parse_table(contents, source, kReplyHeader);
  } catch (const ParseError& e) {
    throw ProtocolError(e.what());
  }
  if (table.rows.size() != expected) {
    throw ProtocolError("expected " + std::to_string(expected) + " prediction rows, got " +
                        std::to_string(table.rows.size()));
  }
  std::vector<ClassProbs> out(expected);
  std::vector<bool> seen(expected, false);
  for (const auto& row : table.rows) {
    auto index = textio::parse_int(row.fields[0]);
    auto benign = textio::parse_double(row.fields[1]);
    auto malignant = textio::parse_double(row.fields[2]);
    if (!index || *index < 0 || static_cast<std::size_t>(*index) >= expected || !benign ||
        !malignant) {
      throw ProtocolError(std::string(source) + ":" + std::to_string(row.line) +
                          ": malformed prediction row");
    }
    const auto i = static_cast<std::size_t>(*index);
    if (seen[i]) {
      throw ProtocolError(std::string(source) + ":" + std::to_string(row.line) +
                          ": duplicate index " + std::to_string(i));
    }
    seen[i] = true;
    try {
      out[i] = validate_probs(*benign, *malignant);
    } catch (const ValidationError& e) {
      throw ProtocolError(std::string(source) + ":" + std::to_string(row.line) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ClassProbs> predict_batch(PredictionProvider& provider,
                                      std::span<const RasterImage> images) {
  if (images.empty()) return {};
  auto out = provider.predict(images);
  if (out.size() != images.size()) {
    throw ProtocolError("provider returned " + std::to_string(out.size()) + " rows for " +
                        std::to_string(images.size()) + " images");
  }
  for (auto& p : out) {
    try {
      p = validate_probs(p.benign, p.malignant);
    } catch (const ValidationError& e) {
      throw ProtocolError(std::string("provider reply: ") + e.what());
    }
  }
  return out;
}

}  // namespace dermfuse::explain

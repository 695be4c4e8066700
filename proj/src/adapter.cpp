#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "crc/eval.hpp"
#include "crc/rng.hpp"

extern char** environ;

namespace crc {
namespace {

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError(std::string("adapter write failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

AdapterProcess::AdapterProcess(const std::vector<std::string>& command) {
  if (command.empty()) throw ArgumentError("adapter command is empty");
  // A dead child must surface as EPIPE, not terminate the harness.
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });

  int in[2], out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw BackendError("pipe failed");
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw BackendError("pipe failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out[1], STDOUT_FILENO);

  std::vector<char*> argv;
  for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const int rc = posix_spawnp(&pid_, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in[0]);
  ::close(out[1]);
  to_child_ = in[1];
  from_child_ = out[0];
  if (rc != 0) {
    ::close(to_child_);
    ::close(from_child_);
    pid_ = -1;
    throw BackendError("cannot start adapter '" + command[0] + "': " + std::strerror(rc));
  }
}

AdapterProcess::~AdapterProcess() {
  if (pid_ > 0) {
    try {
      shutdown();
    } catch (...) {
    }
  }
}

nlohmann::json AdapterProcess::request(const nlohmann::json& message) {
  if (pid_ <= 0) throw BackendError("adapter is not running");
  write_all(to_child_, message.dump() + "\n");
  std::size_t nl;
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    char chunk[65536];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw BackendError("adapter closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  const auto line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw BackendError("adapter sent malformed JSON: " + line.substr(0, 200));
  }
  if (response.contains("error") && !response["error"].is_null()) {
    throw BackendError("adapter error: " + response["error"].dump());
  }
  return response;
}

int AdapterProcess::shutdown() {
  if (pid_ <= 0) return -1;
  try {
    write_all(to_child_, nlohmann::json{{"op", "shutdown"}}.dump() + "\n");
  } catch (const BackendError&) {
  }
  ::close(to_child_);
  ::close(from_child_);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json adapter_instances(const std::vector<ReviewInstance>& instances, std::optional<Attribute> labels) {
  auto out = nlohmann::json::array();
  for (const auto& inst : instances) {
    nlohmann::json j = {{"id", inst.id}, {"fused_text", preprocess(inst).fused_text}};
    if (labels) j["label"] = inst.label(*labels);
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

class AdapterPredictor : public Predictor {
 public:
  AdapterPredictor(std::unique_ptr<AdapterProcess> process, Attribute a, std::string model_dir)
      : process_(std::move(process)), attribute_(a), model_dir_(std::move(model_dir)) {}

  std::vector<bool> predict(const std::vector<ReviewInstance>& instances) override {
    const auto response = process_->request({{"op", "predict"},
                                             {"attribute", to_string(attribute_)},
                                             {"model_dir", model_dir_},
                                             {"instances", adapter_instances(instances, std::nullopt)}});
    const auto& preds = response.at("predictions");
    if (preds.size() != instances.size()) throw BackendError("adapter returned a different number of predictions");
    std::vector<bool> out;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (preds[i].at("id") != instances[i].id) throw BackendError("adapter reordered predictions");
      out.push_back(preds[i].at("label").get<bool>());
    }
    return out;
  }

 private:
  std::unique_ptr<AdapterProcess> process_;
  Attribute attribute_;
  std::string model_dir_;
};

}  // namespace

AdapterBackend::AdapterBackend(std::vector<std::string> command, std::filesystem::path model_root,
                               AdapterHyperparameters hyper, std::string name)
    : command_(std::move(command)), model_root_(std::move(model_root)), hyper_(hyper), name_(std::move(name)) {}

std::unique_ptr<Predictor> AdapterBackend::fit(const Corpus& train, const Corpus& validation, Attribute attribute,
                                               std::uint64_t seed) const {
  std::string ids;
  for (const auto& inst : train.instances) ids += inst.id + '\n';
  char tag[17];
  std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(fnv1a64(ids) ^ seed));
  const auto dir = model_root_ / (std::string(to_string(attribute)) + "-" + tag);
  std::filesystem::create_directories(dir);

  auto process = std::make_unique<AdapterProcess>(command_);
  try {
    process->request({{"op", "train"},
                      {"attribute", to_string(attribute)},
                      {"model_dir", dir.string()},
                      {"seed", seed},
                      {"hyperparameters", hyper_},
                      {"instances", adapter_instances(train.instances, attribute)},
                      {"validation", adapter_instances(validation.instances, attribute)}});
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("adapter train: ") + e.what());
  }
  return std::make_unique<AdapterPredictor>(std::move(process), attribute, dir.string());
}

}  // namespace crc

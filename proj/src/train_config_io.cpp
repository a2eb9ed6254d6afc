#include "avspo/train_config_io.hpp"

#include "avspo/error.hpp"

namespace avspo {

const std::set<std::string>& train_config_keys() {
  static const std::set<std::string> keys = {
      "method",   "group_size", "batch_size", "iterations", "eta_theta",    "eps_clip",
      "inner_epochs", "alpha",  "r_anchor",   "aug_mode",   "tau_init",     "tau_eta",
      "tau_min",  "tau_max",    "collapse_tau", "eps_numeric", "seed",      "execution"};
  return keys;
}

TrainConfig train_config_from_kv(const KvFile& kv) {
  kv.reject_unknown(train_config_keys());
  TrainConfig c;
  // Enum values are wrapped so the message names the key.
  const auto with_key = [&](const char* key, auto&& fn) {
    try {
      return fn();
    } catch (const InvalidArgument& e) {
      throw ParseError(kv.source() + ": key '" + key + "': " + e.what());
    }
  };
  c.method = with_key("method", [&] { return parse_method(kv.get_string("method", "avspo")); });
  c.group_size = static_cast<int>(kv.get_long("group_size", c.group_size));
  c.batch_size = static_cast<int>(kv.get_long("batch_size", c.batch_size));
  c.iterations = static_cast<int>(kv.get_long("iterations", c.iterations));
  c.eta_theta = kv.get_double("eta_theta", c.eta_theta);
  c.eps_clip = kv.get_double("eps_clip", c.eps_clip);
  c.inner_epochs = static_cast<int>(kv.get_long("inner_epochs", c.inner_epochs));
  c.augmentation.alpha = kv.get_double("alpha", c.augmentation.alpha);
  c.augmentation.r_anchor = kv.get_double("r_anchor", c.augmentation.r_anchor);
  c.augmentation.mode = with_key(
      "aug_mode", [&] { return parse_augmentation_mode(kv.get_string("aug_mode", "full")); });
  c.controller.tau_init = kv.get_double("tau_init", c.controller.tau_init);
  c.controller.eta = kv.get_double("tau_eta", c.controller.eta);
  c.controller.tau_min = kv.get_double("tau_min", c.controller.tau_min);
  c.controller.tau_max = kv.get_double("tau_max", c.controller.tau_max);
  c.collapse_tau = kv.get_double("collapse_tau", c.collapse_tau);
  c.eps_numeric = kv.get_double("eps_numeric", c.eps_numeric);
  c.seed = kv.get_u64("seed", c.seed);
  const std::string exec = kv.get_string("execution", "parallel");
  if (exec == "serial") {
    c.execution = Execution::kSerial;
  } else if (exec == "parallel") {
    c.execution = Execution::kParallel;
  } else {
    throw ParseError(kv.source() + ": key 'execution': expected serial|parallel, got '" + exec +
                     "'");
  }
  c.validate();
  return c;
}

TrainConfig parse_train_config(std::string_view text) {
  return train_config_from_kv(KvFile::parse(text, "<config>"));
}

TrainConfig load_train_config(const std::string& path) {
  return train_config_from_kv(KvFile::load(path));
}

}  // namespace avspo

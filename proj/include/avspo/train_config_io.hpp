#pragma once

// Training config files (flat key = value, unknown keys rejected).
//
//   method          grpo | avspo | filter_drop     (avspo)
//   group_size      int >= 2                       (8)
//   batch_size      int >= 1, <= num_questions     (8)
//   iterations      int >= 0                       (500)
//   eta_theta       policy step size               (0.01)
//   eps_clip        clip range in (0, 1)           (0.2)
//   inner_epochs    int >= 1                       (1)
//   alpha           K sensitivity in (0, 1]        (0.5)
//   r_anchor        all-wrong anchor in (0, 1)     (0.1)
//   aug_mode        full | error_only | correct_only | off   (full)
//   tau_init        initial trigger threshold      (0.5)
//   tau_eta         threshold learning rate; 0 = fixed threshold   (0.01)
//   tau_min         lower clamp                    (0.1)
//   tau_max         upper clamp                    (0.9)
//   collapse_tau    std collapse threshold         (1e-6)
//   eps_numeric     advantage denominator epsilon  (1e-8)
//   seed            run seed                       (0)
//   execution       serial | parallel              (parallel)

#include <set>
#include <string>
#include <string_view>

#include "avspo/kv_file.hpp"
#include "avspo/trainer.hpp"

namespace avspo {

const std::set<std::string>& train_config_keys();

TrainConfig train_config_from_kv(const KvFile& kv);
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::string& path);

}  // namespace avspo

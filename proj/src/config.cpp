#include "csirf/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "csirf/errors.hpp"

namespace csirf {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
}

const nlohmann::json* json_get(const nlohmann::json& root, const std::string& dotted_path) {
    const nlohmann::json* cur = &root;
    size_t pos = 0;
    while (pos <= dotted_path.size()) {
        const size_t dot = dotted_path.find('.', pos);
        const std::string key = dotted_path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return cur;
}

RunConfig RunConfig::from_preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    if (name == "desk") {
        c.encoder = nn::EncoderConfig::desk();
        c.train = nn::TrainConfig::desk();
        c.build.n_realizations = 50;
    } else if (name == "paper") {
        c.encoder = nn::EncoderConfig::paper();
        c.train = nn::TrainConfig::paper();
        c.build.n_realizations = 1000;
    } else {
        throw config_error("unknown preset: " + name + " (expected desk or paper)");
    }
    c.head.embed_dim = c.encoder.embed_dim;
    c.head.n_classes = c.n_devices;
    return c;
}

namespace {

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config key " + key + ": " + e.what());
    }
}

void collect_leaves(const nlohmann::json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, const nlohmann::json*>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            collect_leaves(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else {
        out.emplace_back(prefix, &j);
    }
}

} // namespace

void RunConfig::apply(const nlohmann::json& overrides) {
    if (!overrides.is_object()) throw config_error("config root must be a JSON object");
    using Setter = std::function<void(const std::string&, const nlohmann::json&)>;
    const std::map<std::string, Setter> setters = {
        {"population.n_devices", [&](auto& k, auto& j) { n_devices = get_as<int>(j, k); }},
        {"population.scale", [&](auto& k, auto& j) { fingerprint_scale = get_as<double>(j, k); }},
        {"population.profile",
         [&](auto& k, auto& j) { profile = profile_from_string(get_as<std::string>(j, k)); }},
        {"population.identifiability_order",
         [&](auto& k, auto& j) { identifiability_order = get_as<int>(j, k); }},
        {"population.seed", [&](auto& k, auto& j) { population_seed = get_as<uint64_t>(j, k); }},
        {"dataset.n_realizations",
         [&](auto& k, auto& j) { build.n_realizations = get_as<int>(j, k); }},
        {"dataset.snr_grid_db",
         [&](auto& k, auto& j) { build.snr_grid_db = get_as<std::vector<double>>(j, k); }},
        {"dataset.seed", [&](auto& k, auto& j) { dataset_seed = get_as<uint64_t>(j, k); }},
        {"dataset.augment", [&](auto& k, auto& j) { build.augment = get_as<bool>(j, k); }},
        {"dataset.max_records",
         [&](auto& k, auto& j) { build.max_records = get_as<uint64_t>(j, k); }},
        {"split.train", [&](auto& k, auto& j) { fractions.train = get_as<double>(j, k); }},
        {"split.val", [&](auto& k, auto& j) { fractions.val = get_as<double>(j, k); }},
        {"split.test", [&](auto& k, auto& j) { fractions.test = get_as<double>(j, k); }},
        {"split.seed", [&](auto& k, auto& j) { split_seed = get_as<uint64_t>(j, k); }},
        {"split.min_stratum_size",
         [&](auto& k, auto& j) { min_stratum_size = get_as<int>(j, k); }},
        {"encoder.input_height",
         [&](auto& k, auto& j) { encoder.input_height = get_as<int>(j, k); }},
        {"encoder.input_width",
         [&](auto& k, auto& j) { encoder.input_width = get_as<int>(j, k); }},
        {"encoder.stem_channels",
         [&](auto& k, auto& j) { encoder.stem_channels = get_as<int>(j, k); }},
        {"encoder.block_widths",
         [&](auto& k, auto& j) { encoder.block_widths = get_as<std::vector<int>>(j, k); }},
        {"encoder.blocks_per_stage",
         [&](auto& k, auto& j) { encoder.blocks_per_stage = get_as<int>(j, k); }},
        {"encoder.embed_dim", [&](auto& k, auto& j) { encoder.embed_dim = get_as<int>(j, k); }},
        // Accepted so an effective-config dump replays cleanly; the re-sync
        // below still forces it to track the encoder.
        {"head.embed_dim", [&](auto& k, auto& j) { head.embed_dim = get_as<int>(j, k); }},
        {"head.projection_dim",
         [&](auto& k, auto& j) { head.projection_dim = get_as<int>(j, k); }},
        {"head.n_classes", [&](auto& k, auto& j) { head.n_classes = get_as<int>(j, k); }},
        {"train.lr", [&](auto& k, auto& j) { train.lr = get_as<double>(j, k); }},
        {"train.weight_decay",
         [&](auto& k, auto& j) { train.weight_decay = get_as<double>(j, k); }},
        {"train.batch_size", [&](auto& k, auto& j) { train.batch_size = get_as<int>(j, k); }},
        {"train.patience", [&](auto& k, auto& j) { train.patience = get_as<int>(j, k); }},
        {"train.tau", [&](auto& k, auto& j) { train.tau = get_as<double>(j, k); }},
        {"train.max_epochs", [&](auto& k, auto& j) { train.max_epochs = get_as<int>(j, k); }},
        {"train.seed", [&](auto& k, auto& j) { train.seed = get_as<uint64_t>(j, k); }},
        {"train.verbose", [&](auto& k, auto& j) { train.verbose = get_as<bool>(j, k); }},
        {"ls.num_taps", [&](auto& k, auto& j) { ls.num_taps = get_as<int>(j, k); }},
        {"ls.fade_epsilon", [&](auto& k, auto& j) { ls.fade_epsilon = get_as<double>(j, k); }},
        {"eval.report_snr_db",
         [&](auto& k, auto& j) { eval.report_snr_db = get_as<double>(j, k); }},
        {"eval.batch_size", [&](auto& k, auto& j) { eval.batch_size = get_as<int>(j, k); }},
        {"distances.report_snr_db",
         [&](auto& k, auto& j) { distances.report_snr_db = get_as<double>(j, k); }},
        {"distances.n_ref_per_device",
         [&](auto& k, auto& j) { distances.n_ref_per_device = get_as<int>(j, k); }},
        {"distances.denoise_count",
         [&](auto& k, auto& j) { distances.denoise_count = get_as<int>(j, k); }},
        {"distances.max_per_condition",
         [&](auto& k, auto& j) { distances.max_per_condition = get_as<int>(j, k); }},
        {"distances.seed", [&](auto& k, auto& j) { distances.seed = get_as<uint64_t>(j, k); }},
    };

    std::vector<std::pair<std::string, const nlohmann::json*>> leaves;
    collect_leaves(overrides, "", leaves);
    for (const auto& [path, value] : leaves) {
        const auto it = setters.find(path);
        if (it == setters.end()) throw config_error("unknown config key: " + path);
        it->second(path, *value);
    }
    head.embed_dim = encoder.embed_dim;
}

void RunConfig::validate() const {
    if (n_devices < 2) throw config_error("population.n_devices must be >= 2");
    if (head.n_classes != n_devices)
        throw config_error("head.n_classes must equal population.n_devices");
    encoder.validate();
    head.validate();
    train.validate();
    ls.validate();
    fractions.validate();
    if (min_stratum_size < 1) throw config_error("split.min_stratum_size must be >= 1");
    if (build.n_realizations < 1) throw config_error("dataset.n_realizations must be >= 1");
    if (build.snr_grid_db.empty()) throw config_error("dataset.snr_grid_db must be non-empty");
    if (eval.batch_size < 1) throw config_error("eval.batch_size must be >= 1");
    if (distances.n_ref_per_device < 2)
        throw config_error("distances.n_ref_per_device must be >= 2");
    if (distances.denoise_count < 1) throw config_error("distances.denoise_count must be >= 1");
    if (distances.max_per_condition < 2)
        throw config_error("distances.max_per_condition must be >= 2");
}

nlohmann::json RunConfig::to_json() const {
    return {{"preset", preset},
            {"population",
             {{"n_devices", n_devices},
              {"scale", fingerprint_scale},
              {"profile", to_string(profile)},
              {"identifiability_order", identifiability_order},
              {"seed", population_seed}}},
            {"dataset",
             {{"n_realizations", build.n_realizations},
              {"snr_grid_db", build.snr_grid_db},
              {"seed", dataset_seed},
              {"augment", build.augment},
              {"max_records", build.max_records}}},
            {"split",
             {{"train", fractions.train},
              {"val", fractions.val},
              {"test", fractions.test},
              {"seed", split_seed},
              {"min_stratum_size", min_stratum_size}}},
            {"encoder", nn::encoder_config_json(encoder)},
            {"head", nn::head_config_json(head)},
            {"train", nn::train_config_json(train)},
            {"ls", {{"num_taps", ls.num_taps}, {"fade_epsilon", ls.fade_epsilon}}},
            {"eval", {{"report_snr_db", eval.report_snr_db}, {"batch_size", eval.batch_size}}},
            {"distances",
             {{"report_snr_db", distances.report_snr_db},
              {"n_ref_per_device", distances.n_ref_per_device},
              {"denoise_count", distances.denoise_count},
              {"max_per_condition", distances.max_per_condition},
              {"seed", distances.seed}}}};
}

} // namespace csirf

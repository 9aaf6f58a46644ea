// courage: ingest -> train -> predict -> evaluate.
//
// Exit codes: 0 success, 1 bad input or configuration, 2 missing input file,
// 3 training aborted on a non-finite loss.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "courage/courage.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace courage;

namespace {

constexpr int kExitError = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitAborted = 3;

struct MissingInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("no ") + what + " given");
    if (!fs::is_regular_file(path)) throw MissingInput(std::string(what) + " not found: " + path);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

/// Run manifest: configuration, input fingerprints and output fingerprints.
/// Keys are sorted and nothing time-dependent is recorded.
class Manifest {
public:
    explicit Manifest(std::string command) { doc_["command"] = std::move(command); }

    json& config() { return doc_["config"]; }
    json& info() { return doc_["info"]; }

    void input(const std::string& role, const std::string& path) {
        doc_["inputs"][role] = {{"path", path}, {"fnv1a64", hex64(hash_file(path))}};
    }
    void output(const std::string& dir, const std::string& name) {
        doc_["outputs"][name] = hex64(hash_file(join_path(dir, name)));
    }
    void write(const std::string& dir) const {
        std::ofstream os(join_path(dir, "manifest.json"));
        os << doc_.dump(2) << '\n';
        if (!os) throw std::runtime_error("cannot write manifest in " + dir);
    }

private:
    json doc_ = json::object();
};

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
    std::string cases;
    std::string deaths;
    std::string mobility;
    std::string out;
};

int cmd_ingest(const IngestOptions& o) {
    require_file(o.cases, "cases file");
    require_file(o.deaths, "deaths file");
    require_file(o.mobility, "mobility file");
    ensure_dir(o.out);

    auto jhu = data::parse_jhu_files(o.cases, o.deaths);
    const auto mobility = data::parse_mobility_file(o.mobility, jhu.counties);
    data::attach_mobility(jhu.records, mobility);

    data::SeriesCache cache;
    cache.counties = data::build_county_series(jhu.records, jhu.counties);
    cache.states = data::aggregate_states(cache.counties);
    if (cache.counties.empty()) throw FormatError(o.cases + ": no usable county rows");
    data::save_cache(join_path(o.out, "series.cache"), cache);

    const auto county_windows = data::build_windows(cache.counties, data::WindowSpec{}).size();
    const auto state_windows = data::build_windows(cache.states, data::WindowSpec{}).size();
    spdlog::info("ingested {} counties, {} states, {} days ({} .. {}), {} county windows", cache.counties.size(),
                 cache.states.size(), cache.counties.front().days(), format_iso(cache.first_date()),
                 format_iso(cache.last_date()), county_windows);

    Manifest m("ingest");
    m.input("cases", o.cases);
    m.input("deaths", o.deaths);
    m.input("mobility", o.mobility);
    m.info() = {{"counties", cache.counties.size()},
                {"states", cache.states.size()},
                {"first_date", format_iso(cache.first_date())},
                {"last_date", format_iso(cache.last_date())},
                {"county_windows", county_windows},
                {"state_windows", state_windows},
                {"warnings", jhu.warnings.size() + mobility.warnings.size()},
                {"mobility_rows_dropped", mobility.dropped_rows}};
    m.output(o.out, "series.cache");
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// shared by train / predict / evaluate

struct RangeOptions {
    double split = 0.8;
    std::string range_start = "2020-03-07";
    std::string range_end; // empty: last date in the cache
    std::size_t stride = 7; // evaluation anchors, counted from the test start
};

data::SplitDates resolve_split(const RangeOptions& r, const data::SeriesCache& cache) {
    const auto start = parse_iso_date(r.range_start);
    const auto end = r.range_end.empty() ? cache.last_date() : parse_iso_date(r.range_end);
    return data::compute_split(std::max(start, cache.first_date()), std::min(end, cache.last_date()), r.split);
}

json split_json(const data::SplitDates& s) {
    return {{"fraction", s.fraction},
            {"range_start", format_iso(s.range_start)},
            {"range_end", format_iso(s.range_end)},
            {"train_end", format_iso(s.train_end)},
            {"test_start", format_iso(s.test_start)}};
}

data::SeriesCache load_cache_checked(const std::string& path) {
    require_file(path, "series cache");
    return data::load_cache(path);
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string cache;
    std::string out;
    RangeOptions range;
    std::string level = "county";
    bool include_state = true;
    bool mixup = false;
    double mixup_alpha = 0.2;
    std::uint64_t seed = 0;
    std::size_t epochs = 500;
    double lr = 0.001;
    std::size_t lr_period = 100;
    double delta = 1.0;
    std::size_t batch = 128;
    double clip = 5.0;
    bool no_clip = false;
    std::string pooling = "last";
    bool no_layernorm = false;
    std::size_t model_dim = 32;
    std::size_t heads = 8;
    std::size_t ffn = 64;
    std::size_t layers = 1;
    std::size_t window = 7;
    std::size_t workers = 1;
};

data::Level parse_level(const std::string& s) {
    if (s == "county") return data::Level::County;
    if (s == "state") return data::Level::State;
    throw ConfigError("unknown level '" + s + "' (expected county|state)");
}

json train_config_json(const TrainOptions& o, const training::Checkpoint& c) {
    return {{"level", data::to_string(c.level)},
            {"include_state", c.include_state_windows},
            {"mixup", c.mixup.enabled},
            {"mixup_alpha", c.mixup.alpha},
            {"seed", c.train.seed},
            {"epochs", c.train.epochs},
            {"lr", c.train.initial_lr},
            {"lr_period", c.train.lr_halving_period},
            {"delta", c.train.huber_delta},
            {"batch", c.train.batch_size},
            {"clip", c.train.clip_norm},
            {"pooling", model::to_string(c.model.pooling)},
            {"layernorm", c.model.use_residual_layernorm},
            {"model_dim", c.model.model_dim},
            {"heads", c.model.heads},
            {"ffn", c.model.ffn_dim},
            {"layers", c.model.layers},
            {"window", c.model.window_days},
            {"workers", o.workers},
            {"split", o.range.split},
            {"range_start", o.range.range_start},
            {"range_end", o.range.range_end}};
}

void write_loss_csv(const std::string& path, const std::vector<training::LossPoint>& curve) {
    std::ofstream os(path);
    os << "epoch,lr,train_loss\n";
    for (const auto& p : curve)
        os << p.epoch << ',' << forecast::format_number(p.lr) << ',' << forecast::format_number(p.loss) << '\n';
    if (!os) throw std::runtime_error("cannot write " + path);
}

int cmd_train(const TrainOptions& o) {
    const auto cache = load_cache_checked(o.cache);
    ensure_dir(o.out);

    training::Checkpoint ckpt;
    ckpt.level = parse_level(o.level);
    ckpt.include_state_windows = ckpt.level == data::Level::County && o.include_state;
    ckpt.model = model::ModelConfig::with_dims(data::kFeatureCount, o.window, o.model_dim, o.heads, o.ffn, o.layers);
    ckpt.model.pooling = model::parse_pooling(o.pooling);
    ckpt.model.use_residual_layernorm = !o.no_layernorm;
    ckpt.model.validate();
    ckpt.train.epochs = o.epochs;
    ckpt.train.initial_lr = o.lr;
    ckpt.train.lr_halving_period = o.lr_period;
    ckpt.train.huber_delta = o.delta;
    ckpt.train.batch_size = o.batch;
    ckpt.train.seed = o.seed;
    ckpt.train.clip_norm = o.no_clip ? 0.0 : o.clip;
    ckpt.train.workers = o.workers;
    ckpt.train.validate();
    ckpt.mixup.enabled = o.mixup;
    ckpt.mixup.alpha = o.mixup_alpha;
    ckpt.mixup.seed = o.seed;
    ckpt.mixup.validate();

    const auto split = resolve_split(o.range, cache);
    ckpt.train_end = split.train_end;
    ckpt.test_start = split.test_start;

    data::WindowSpec spec;
    spec.length = o.window;
    std::vector<data::SampleWindow> windows;
    if (ckpt.level == data::Level::County) {
        windows = data::build_windows(cache.counties, spec);
        if (ckpt.include_state_windows) {
            auto s = data::build_windows(cache.states, spec);
            windows.insert(windows.end(), s.begin(), s.end());
        }
    } else {
        windows = data::build_windows(cache.states, spec);
    }
    auto [train_raw, test_raw] = data::split(std::move(windows), split);
    if (train_raw.empty()) throw ConfigError("no training windows before " + format_iso(split.train_end));
    ckpt.standardizer = data::Standardizer::fit(train_raw);
    const auto train_z = ckpt.standardizer.apply(train_raw);
    spdlog::info("training {} model on {} windows (train_end {}), {} epochs, mixup {}", data::to_string(ckpt.level),
                 train_z.size(), format_iso(split.train_end), o.epochs, o.mixup ? "on" : "off");

    Manifest m("train");
    m.input("cache", o.cache);
    m.config() = train_config_json(o, ckpt);
    m.info()["split"] = split_json(split);
    m.info()["train_windows"] = train_z.size();
    m.info()["seed"] = o.seed;

    int code = 0;
    training::TrainResult result;
    try {
        result = training::train(train_z, ckpt.model, ckpt.train, ckpt.mixup, std::nullopt,
                                 [](const training::LossPoint& p) {
                                     if (p.epoch % 10 == 0) spdlog::info("epoch {} lr {} loss {:.6g}", p.epoch, p.lr, p.loss);
                                 });
    } catch (const training::TrainingAborted& e) {
        spdlog::error("{}", e.what());
        result = e.last_good();
        m.info()["aborted"] = e.what();
        code = kExitAborted;
    }
    ckpt.params = result.params;

    const std::string ckpt_name = code == 0 ? "checkpoint.bin" : "checkpoint.last_good.bin";
    training::save_checkpoint(join_path(o.out, ckpt_name), ckpt);
    write_loss_csv(join_path(o.out, "loss.csv"), result.curve);
    m.info()["final_loss"] = result.curve.empty() ? json(nullptr) : json(result.curve.back().loss);
    m.output(o.out, ckpt_name);
    m.output(o.out, "loss.csv");
    m.write(o.out);
    return code;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
    std::string cache;
    std::string out;
    std::string county;
    std::string mixup;
    std::string state;
    RangeOptions range;
    std::size_t workers = 1;
};

std::vector<data::SampleWindow> test_windows(const std::vector<data::LocationSeries>& series,
                                             const training::Checkpoint& ckpt, Date range_end, std::size_t stride) {
    data::WindowSpec spec;
    spec.length = ckpt.model.window_days;
    spec.stride = stride;
    spec.first_anchor = ckpt.test_start;
    spec.min_anchor = ckpt.test_start;
    spec.max_anchor = add_days(range_end, -static_cast<long>(data::kHorizonDays));
    return ckpt.standardizer.apply(data::build_windows(series, spec));
}

void write_set(const std::string& dir, const std::string& name, const forecast::ForecastSet& f, Manifest& m) {
    std::ofstream os(join_path(dir, name));
    forecast::write_forecast_csv(os, f);
    if (!os) throw std::runtime_error("cannot write " + join_path(dir, name));
    os.close();
    m.output(dir, name);
}

int cmd_predict(const PredictOptions& o) {
    const auto cache = load_cache_checked(o.cache);
    for (const auto* p : {&o.county, &o.mixup, &o.state})
        if (!p->empty()) require_file(*p, "checkpoint");
    ensure_dir(o.out);

    Manifest m("predict");
    m.input("cache", o.cache);
    std::map<std::string, training::Checkpoint> ckpts;
    const std::pair<const char*, const std::string*> roles[] = {{"County", &o.county}, {"Mixup", &o.mixup}, {"State", &o.state}};
    for (const auto& [name, path] : roles) {
        if (path->empty()) continue;
        ckpts[name] = training::load_checkpoint(*path);
        m.input(name, *path);
    }

    // All checkpoints must agree on the test period; without any, the split flags decide.
    data::SplitDates split = resolve_split(o.range, cache);
    if (!ckpts.empty()) {
        const auto& first = ckpts.begin()->second;
        for (const auto& [name, c] : ckpts) {
            if (c.test_start != first.test_start) {
                throw MismatchError("checkpoints disagree on the test period (" + name + " starts " +
                                    format_iso(c.test_start) + ")");
            }
        }
        split.train_end = first.train_end;
        split.test_start = first.test_start;
    }
    const Date last_anchor = add_days(split.range_end, -static_cast<long>(data::kHorizonDays));
    if (last_anchor < split.test_start) throw ConfigError("test period leaves no anchor with two target weeks");
    const auto anchors = forecast::anchor_range(split.test_start, last_anchor, o.range.stride);
    m.config() = {{"split", o.range.split}, {"range_start", o.range.range_start}, {"range_end", o.range.range_end},
                  {"stride", o.range.stride}, {"workers", o.workers}};
    m.info()["split"] = split_json(split);
    m.info()["anchors"] = anchors.size();

    write_set(o.out, "Naive_county.csv", forecast::naive_forecast(cache.counties, anchors, data::Level::County), m);
    write_set(o.out, "Naive_state.csv", forecast::naive_forecast(cache.states, anchors, data::Level::State), m);

    std::map<std::string, forecast::ForecastSet> county_sets;
    for (const auto& [name, c] : ckpts) {
        if (c.level == data::Level::State) {
            if (name != "State") throw ConfigError(name + " checkpoint was trained on state windows");
            const auto windows = test_windows(cache.states, c, split.range_end, o.range.stride);
            const auto f = forecast::predict(name, c, windows, o.workers);
            write_set(o.out, "State_state.csv", f, m);
            continue;
        }
        if (name == "State") throw ConfigError("State checkpoint was trained on county windows");
        auto f = forecast::predict(name, c, test_windows(cache.counties, c, split.range_end, o.range.stride),
                                   o.workers);
        write_set(o.out, name + "_county.csv", f, m);
        write_set(o.out, name + "_state.csv", forecast::aggregate_to_state(f), m);
        county_sets.emplace(name, std::move(f));
    }
    if (county_sets.count("County") && county_sets.count("Mixup")) {
        const auto ens = forecast::ensemble_average(county_sets.at("County"), county_sets.at("Mixup"), "COURAGE");
        write_set(o.out, "COURAGE_county.csv", ens, m);
        write_set(o.out, "COURAGE_state.csv", forecast::aggregate_to_state(ens), m);
    }
    spdlog::info("wrote forecasts for {} anchors ({} .. {})", anchors.size(), format_iso(split.test_start),
                 format_iso(last_anchor));
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string cache;
    std::string out;
    std::vector<std::string> forecasts;
    std::vector<std::string> periods;
    std::string truth = "raw";
    std::string split_label;
    RangeOptions range;
    bool plots = true;
};

std::vector<forecast::Period> parse_periods(const std::vector<std::string>& specs) {
    if (specs.empty()) return forecast::default_periods();
    std::vector<forecast::Period> out;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw ConfigError("period '" + s + "' must look like START:END");
        out.push_back({parse_iso_date(s.substr(0, colon)), parse_iso_date(s.substr(colon + 1))});
    }
    return out;
}

int cmd_evaluate(const EvaluateOptions& o) {
    const auto cache = load_cache_checked(o.cache);
    for (const auto& f : o.forecasts) require_file(f, "forecast file");
    ensure_dir(o.out);

    Manifest m("evaluate");
    m.input("cache", o.cache);
    std::vector<forecast::ForecastSet> sets;
    std::string split_label = o.split_label;
    if (o.forecasts.empty()) {
        const auto split = resolve_split(o.range, cache);
        const Date last_anchor = add_days(split.range_end, -static_cast<long>(data::kHorizonDays));
        const auto anchors = forecast::anchor_range(split.test_start, last_anchor, o.range.stride);
        sets.push_back(forecast::naive_forecast(cache.counties, anchors, data::Level::County));
        sets.push_back(forecast::naive_forecast(cache.states, anchors, data::Level::State));
        m.info()["split"] = split_json(split);
        if (split_label.empty()) split_label = forecast::format_number(o.range.split);
    } else {
        for (std::size_t i = 0; i < o.forecasts.size(); ++i) {
            m.input("forecast" + std::to_string(i), o.forecasts[i]);
            for (auto& f : forecast::read_forecast_file(o.forecasts[i])) sets.push_back(std::move(f));
        }
    }

    const auto kind = o.truth == "raw"        ? forecast::TruthKind::Raw
                      : o.truth == "smoothed" ? forecast::TruthKind::Smoothed
                                              : throw ConfigError("--truth must be raw or smoothed");
    std::set<Date> anchor_set;
    for (const auto& f : sets)
        for (const auto& e : f.entries) anchor_set.insert(e.anchor);
    const std::vector<Date> anchors(anchor_set.begin(), anchor_set.end());
    auto truth = forecast::build_truth(cache.counties, anchors, kind);
    truth.merge(forecast::build_truth(cache.states, anchors, kind));

    const auto periods = parse_periods(o.periods);
    const auto report = forecast::evaluate_periods(sets, truth, periods, split_label);
    {
        std::ofstream os(join_path(o.out, "report.csv"));
        forecast::write_report_csv(os, report);
    }
    m.output(o.out, "report.csv");

    // Whole-span summary, one period per set covering all of its anchors.
    forecast::EvalReport summary;
    for (const auto& f : sets) {
        if (f.entries.empty()) continue;
        forecast::Period whole{f.entries.front().anchor, f.entries.back().anchor};
        auto part = forecast::evaluate_periods({f}, truth, {whole}, split_label);
        summary.rows.insert(summary.rows.end(), part.rows.begin(), part.rows.end());
        spdlog::info("{} {}: MAE week1 {:.4f} week2 {:.4f}", f.model, data::to_string(f.level), *part.rows[0].mae,
                     *part.rows[1].mae);
    }
    {
        std::ofstream os(join_path(o.out, "summary.csv"));
        forecast::write_report_csv(os, summary);
    }
    m.output(o.out, "summary.csv");
    for (const auto& [model, n] : report.excluded)
        if (n > 0) spdlog::info("{}: {} forecasts outside every period", model, n);

    if (o.plots) {
        const auto find = [&](const char* model) -> const forecast::ForecastSet* {
            for (const auto& f : sets)
                if (f.level == data::Level::State && f.model == model) return &f;
            return nullptr;
        };
        const forecast::PlotSources src{find("Naive"), find("County"), find("Mixup"), find("COURAGE")};
        const std::string plot_dir = join_path(o.out, "plots");
        ensure_dir(plot_dir);
        for (const auto& s : cache.states) {
            const std::string name = "plots/" + s.id + ".csv";
            std::ofstream os(join_path(o.out, name));
            forecast::write_plot_csv(os, s.id, truth, src);
            os.close();
            m.output(o.out, name);
        }
    }

    json excluded = json::object();
    for (const auto& [model, n] : report.excluded) excluded[model] = n;
    m.config() = {{"truth", o.truth}, {"periods", o.periods}, {"split_label", split_label}, {"plots", o.plots},
                  {"split", o.range.split}, {"range_start", o.range.range_start}, {"range_end", o.range.range_end},
                  {"stride", o.range.stride}};
    m.info()["excluded"] = excluded;
    m.write(o.out);
    return 0;
}

void add_range_options(CLI::App* cmd, RangeOptions& r) {
    cmd->add_option("--split", r.split, "Fraction of the date range used for training")->capture_default_str();
    cmd->add_option("--range-start", r.range_start, "First date of the modelling range (YYYY-MM-DD)")
        ->capture_default_str();
    cmd->add_option("--range-end", r.range_end, "Last date of the modelling range (default: last data date)");
}

void add_stride_option(CLI::App* cmd, RangeOptions& r) {
    cmd->add_option("--stride", r.stride, "Days between evaluation anchors")->capture_default_str();
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("courage");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    if (const char* env = std::getenv("COURAGE_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(env));
    } else {
        spdlog::set_level(spdlog::level::info);
    }
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"County-level COVID-19 death forecasting with a transformer encoder"};
    app.set_config("--config", "", "key=value config file; command-line flags take precedence");
    app.require_subcommand(1);

    IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse JHU + mobility CSVs into a series cache");
    c_ingest->add_option("--cases", ingest.cases, "JHU confirmed-cases CSV (wide format)")->required();
    c_ingest->add_option("--deaths", ingest.deaths, "JHU deaths CSV (wide format, with Population)")->required();
    c_ingest->add_option("--mobility", ingest.mobility, "Google community mobility CSV")->required();
    c_ingest->add_option("--out", ingest.out, "Output directory")->required();

    TrainOptions train;
    auto* c_train = app.add_subcommand("train", "Train a County, Mixup or State model");
    c_train->add_option("--cache", train.cache, "Series cache written by ingest")->required();
    c_train->add_option("--out", train.out, "Output directory")->required();
    add_range_options(c_train, train.range);
    c_train->add_option("--level", train.level, "county or state")->capture_default_str();
    c_train->add_flag("--include-state,!--no-include-state", train.include_state,
                      "Add state windows to the county training set");
    c_train->add_flag("--mixup", train.mixup, "Train with mixup augmentation");
    c_train->add_option("--mixup-alpha", train.mixup_alpha, "Beta(alpha, alpha) parameter")->capture_default_str();
    c_train->add_option("--seed", train.seed, "Root seed")->capture_default_str();
    c_train->add_option("--epochs", train.epochs)->capture_default_str();
    c_train->add_option("--lr", train.lr, "Initial learning rate")->capture_default_str();
    c_train->add_option("--lr-period", train.lr_period, "Halve the learning rate every N epochs")->capture_default_str();
    c_train->add_option("--delta", train.delta, "Huber delta")->capture_default_str();
    c_train->add_option("--batch", train.batch)->capture_default_str();
    c_train->add_option("--clip", train.clip, "Global gradient-norm clip")->capture_default_str();
    c_train->add_flag("--no-clip", train.no_clip, "Disable gradient clipping");
    c_train->add_option("--pooling", train.pooling, "last or mean")->capture_default_str();
    c_train->add_flag("--no-layernorm", train.no_layernorm, "Drop residual connections and layer norm");
    c_train->add_option("--model-dim", train.model_dim)->capture_default_str();
    c_train->add_option("--heads", train.heads)->capture_default_str();
    c_train->add_option("--ffn", train.ffn)->capture_default_str();
    c_train->add_option("--layers", train.layers)->capture_default_str();
    c_train->add_option("--window", train.window, "Input days per sample")->capture_default_str();
    c_train->add_option("--workers", train.workers, "Threads for per-sample gradients")->capture_default_str();

    PredictOptions predict;
    auto* c_predict = app.add_subcommand("predict", "Write Naive, model, state and ensemble forecast CSVs");
    c_predict->add_option("--cache", predict.cache, "Series cache written by ingest")->required();
    c_predict->add_option("--out", predict.out, "Output directory")->required();
    c_predict->add_option("--county", predict.county, "County model checkpoint");
    c_predict->add_option("--mixup", predict.mixup, "Mixup model checkpoint");
    c_predict->add_option("--state", predict.state, "State model checkpoint");
    add_range_options(c_predict, predict.range);
    add_stride_option(c_predict, predict.range);
    c_predict->add_option("--workers", predict.workers)->capture_default_str();

    EvaluateOptions evaluate;
    auto* c_evaluate = app.add_subcommand("evaluate", "Score forecasts by MAE per horizon and period");
    c_evaluate->add_option("--cache", evaluate.cache, "Series cache written by ingest")->required();
    c_evaluate->add_option("--out", evaluate.out, "Output directory")->required();
    c_evaluate->add_option("--forecasts", evaluate.forecasts, "Forecast CSVs (default: Naive from the cache)");
    c_evaluate->add_option("--period", evaluate.periods, "START:END, repeatable (default: five 2020-21 periods)");
    c_evaluate->add_option("--truth", evaluate.truth, "raw or smoothed weekly totals")->capture_default_str();
    c_evaluate->add_option("--split-label", evaluate.split_label, "Value of the report's split column");
    c_evaluate->add_flag("--plots,!--no-plots", evaluate.plots, "Write per-state plot-data CSVs");
    add_range_options(c_evaluate, evaluate.range);
    add_stride_option(c_evaluate, evaluate.range);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_ingest) return cmd_ingest(ingest);
        if (*c_train) return cmd_train(train);
        if (*c_predict) return cmd_predict(predict);
        if (*c_evaluate) return cmd_evaluate(evaluate);
    } catch (const MissingInput& e) {
        spdlog::error("{}", e.what());
        return kExitMissingInput;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitError;
    }
    return kExitError;
}

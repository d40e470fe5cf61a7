#include "topotrack/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "topotrack/errors.hpp"

namespace topotrack::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RejectedInputError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw RejectedInputError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

std::string meta_comment(const ArtifactMeta& meta) {
    return "# seed=" + std::to_string(meta.seed) + " config_hash=" + meta.config_hash;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

json meta_to_json(const ArtifactMeta& meta) {
    return json{{"seed", meta.seed}, {"config_hash", meta.config_hash}};
}

void write_trajectories(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets,
                        const ArtifactMeta& meta) {
    std::ofstream out = open_output(path);
    out << meta_comment(meta) << "\n";
    out << "id,t,x,y,z\n";
    for (const Tracklet& t : tracklets) {
        for (const Sample& s : t.samples) {
            out << t.id << ',' << s.t << ',' << s.x << ',' << s.y << ',' << s.z << "\n";
        }
    }
}

std::vector<Tracklet> read_trajectories(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<Tracklet> out;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "id,t,x,y,z") {
                throw RejectedInputError("trajectory CSV: bad header in '" + path.string() + "'");
            }
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 5) {
            throw RejectedInputError("trajectory CSV: line " + std::to_string(line_no) +
                                     ": expected 5 fields");
        }
        Sample s;
        try {
            s = {std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
        } catch (const std::exception&) {
            throw RejectedInputError("trajectory CSV: line " + std::to_string(line_no) +
                                     ": bad number");
        }
        if (out.empty() || out.back().id != f[0]) {
            Tracklet t;
            t.id = f[0];
            out.push_back(std::move(t));
        }
        out.back().samples.push_back(s);
    }
    for (const Tracklet& t : out) t.validate();
    return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets,
                  const ArtifactMeta& meta) {
    std::ofstream out = open_output(path);
    out << meta_comment(meta) << "\n";
    out << "id,label\n";
    for (const Tracklet& t : tracklets) {
        if (t.label) out << t.id << ',' << *t.label << "\n";
    }
}

void attach_labels(const std::filesystem::path& path, std::vector<Tracklet>& tracklets) {
    std::ifstream in = open_input(path);
    std::string line;
    bool header_seen = false;
    std::vector<std::pair<std::string, std::string>> labels;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "id,label") {
                throw RejectedInputError("label CSV: bad header in '" + path.string() + "'");
            }
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 2) throw RejectedInputError("label CSV: expected 2 fields");
        labels.emplace_back(f[0], f[1]);
    }
    for (Tracklet& t : tracklets) {
        for (const auto& [id, label] : labels) {
            if (id == t.id) {
                t.label = label;
                break;
            }
        }
    }
}

json diagram_to_json(const PersistenceDiagram& diagram) {
    json pairs = json::array();
    for (const PersistencePair& p : diagram.pairs) pairs.push_back({p.birth, p.death});
    return json{{"augmented", diagram.augmented}, {"pairs", pairs}};
}

PersistenceDiagram diagram_from_json(const json& j) {
    PersistenceDiagram d;
    d.augmented = j.at("augmented").get<bool>();
    for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) {
            throw RejectedInputError("diagram JSON: pair must be [birth, death]");
        }
        d.pairs.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    std::sort(d.pairs.begin(), d.pairs.end());
    return d;
}

json binning_to_json(const BinningParams& params) {
    return json{{"rows", params.rows},
                {"cols", params.cols},
                {"birth_min", params.birth_min},
                {"birth_max", params.birth_max},
                {"life_max", params.life_max}};
}

BinningParams binning_from_json(const json& j) {
    BinningParams p;
    p.rows = j.at("rows").get<int>();
    p.cols = j.at("cols").get<int>();
    p.birth_min = j.at("birth_min").get<double>();
    p.birth_max = j.at("birth_max").get<double>();
    p.life_max = j.at("life_max").get<double>();
    p.validate();
    return p;
}

json model_to_json(const BehaviorModel& model, const ArtifactMeta& meta) {
    json binning = json::object();
    for (const auto& [kind, params] : model.binning) {
        binning[to_string(kind)] = binning_to_json(params);
    }
    json signals = json::array();
    for (SignalKind kind : model.signals) signals.push_back(to_string(kind));

    json params;
    switch (model.type) {
        case ModelType::logistic:
            params = json{{"weights", model.logistic.weights}, {"bias", model.logistic.bias}};
            break;
        case ModelType::poisson:
            params = json{{"rates", model.poisson.rates}, {"eps", model.poisson.eps}};
            break;
        case ModelType::multinomial:
            params = json{{"probs", model.multinomial.probs}, {"eps", model.multinomial.eps}};
            break;
    }
    return json{{"type", to_string(model.type)},
                {"classes", model.classes},
                {"priors", model.priors},
                {"signals", signals},
                {"binning", binning},
                {"augmented", model.augmented},
                {"window", model.window},
                {"params", params},
                {"meta", meta_to_json(meta)}};
}

BehaviorModel model_from_json(const json& j) {
    BehaviorModel model;
    model.type = model_type_from_string(j.at("type").get<std::string>());
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.priors = j.at("priors").get<std::vector<double>>();
    model.signals.clear();
    for (const auto& s : j.at("signals")) {
        model.signals.push_back(signal_kind_from_string(s.get<std::string>()));
    }
    for (const auto& [key, value] : j.at("binning").items()) {
        model.binning[signal_kind_from_string(key)] = binning_from_json(value);
    }
    model.augmented = j.at("augmented").get<bool>();
    model.window = j.at("window").get<int>();

    const json& params = j.at("params");
    switch (model.type) {
        case ModelType::logistic:
            model.logistic.classes = model.classes;
            model.logistic.weights = params.at("weights").get<std::vector<std::vector<double>>>();
            model.logistic.bias = params.at("bias").get<std::vector<double>>();
            break;
        case ModelType::poisson:
            model.poisson.classes = model.classes;
            model.poisson.rates = params.at("rates").get<std::vector<std::vector<double>>>();
            model.poisson.eps = params.at("eps").get<double>();
            break;
        case ModelType::multinomial:
            model.multinomial.classes = model.classes;
            model.multinomial.probs = params.at("probs").get<std::vector<std::vector<double>>>();
            model.multinomial.eps = params.at("eps").get<double>();
            break;
    }
    if (model.priors.size() != model.classes.size()) {
        throw RejectedInputError("model JSON: priors/classes size mismatch");
    }
    return model;
}

void write_model(const std::filesystem::path& path, const BehaviorModel& model,
                 const ArtifactMeta& meta) {
    save_json(path, model_to_json(model, meta));
}

BehaviorModel read_model(const std::filesystem::path& path) {
    return model_from_json(load_json(path));
}

void write_scans(const std::filesystem::path& path, const std::vector<Scan>& scans,
                 const ArtifactMeta& meta) {
    std::ofstream out = open_output(path);
    out << R"({"meta": )" << meta_to_json(meta).dump() << "}\n";
    for (const Scan& scan : scans) {
        json measurements = json::array();
        for (const Measurement& m : scan.measurements) {
            measurements.push_back(
                json{{"pos", {m.pos(0), m.pos(1)}},
                     {"cov", {{m.cov(0, 0), m.cov(0, 1)}, {m.cov(1, 0), m.cov(1, 1)}}}});
        }
        out << json{{"t", scan.t}, {"measurements", measurements}}.dump() << "\n";
    }
}

std::vector<Scan> read_scans(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<Scan> scans;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw RejectedInputError("scan JSONL: " + std::string(e.what()));
        }
        if (j.contains("meta") && !j.contains("t")) continue;
        Scan scan;
        scan.t = j.at("t").get<double>();
        for (const auto& jm : j.at("measurements")) {
            Measurement m;
            m.t = scan.t;
            m.pos = Eigen::Vector2d(jm.at("pos")[0].get<double>(), jm.at("pos")[1].get<double>());
            const auto& cov = jm.at("cov");
            m.cov << cov[0][0].get<double>(), cov[0][1].get<double>(), cov[1][0].get<double>(),
                cov[1][1].get<double>();
            scan.measurements.push_back(std::move(m));
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

json tracker_output_to_json(const TrackerOutput& output, const ArtifactMeta& meta) {
    const bool has_model = !output.behavior_classes.empty();
    json tracks = json::array();
    for (const Track& t : output.best.tracks) {
        json history = json::array();
        for (const auto& [scan, meas] : t.history) history.push_back({scan, meas});

        json trace = json::array();
        if (has_model) {
            for (const auto& [time, posterior] : t.posterior_trace) {
                trace.push_back(json{{"t", time}, {"posterior", posterior}});
            }
        }
        tracks.push_back(json{{"id", t.id},
                              {"history", history},
                              {"llr",
                               {{"kinematic", t.llr_kinematic},
                                {"type", t.llr_type},
                                {"behavior", t.llr_behavior},
                                {"total", t.total_llr()}}},
                              {"behavior_posterior",
                               has_model && !t.behavior_posterior.empty()
                                   ? json(t.behavior_posterior)
                                   : json(0.5)},
                              {"posterior_trace", trace}});
    }
    return json{{"meta", meta_to_json(meta)},
                {"score", output.best.score()},
                {"scans_processed", output.scans_processed},
                {"behavior_classes", output.behavior_classes},
                {"tracks", tracks}};
}

void write_monte_carlo_csv(const std::filesystem::path& path,
                           const std::vector<MonteCarloRow>& rows, const ArtifactMeta& meta) {
    std::ofstream out = open_output(path);
    out << meta_comment(meta) << "\n";
    out << "sigma,variant,trials,successes,rate,stderr\n";
    for (const MonteCarloRow& r : rows) {
        out << r.sigma << ',' << r.variant << ',' << r.trials << ',' << r.successes << ','
            << r.rate << ',' << r.stderr_ << "\n";
    }
}

void write_bin_matrix_csv(const std::filesystem::path& path, const BinnedFeature& feature,
                          const ArtifactMeta& meta) {
    std::ofstream out = open_output(path);
    out << meta_comment(meta) << "\n";
    for (int i = 0; i < feature.params.rows; ++i) {
        for (int j = 0; j < feature.params.cols; ++j) {
            out << feature.at(i, j) << (j + 1 < feature.params.cols ? "," : "\n");
        }
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw RejectedInputError("JSON parse error in '" + path.string() + "': " + e.what());
    }
}

void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

}  // namespace topotrack::io

#include "forge/service/store.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <set>

#include "forge/error.hpp"
#include "forge/util/hash.hpp"
#include "json.hpp"

namespace forge::service {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Manifest::to_json() const {
    ordered_json j;
    j["store_version"] = store_version;
    j["corpus_hash"] = corpus_hash;
    j["config"] = config_json.empty() ? ordered_json(nullptr) : ordered_json::parse(config_json);
    ordered_json st = ordered_json::object();
    for (const auto& [name, rec] : stages) {
        ordered_json r;
        r["input_key"] = rec.input_key;
        ordered_json outs = ordered_json::object();
        for (const auto& [file, ref] : rec.outputs) outs[file] = {{"path", ref.path}, {"sha256", ref.sha256}};
        r["outputs"] = outs;
        st[name] = r;
    }
    j["stages"] = st;
    return j.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
    Manifest m;
    try {
        const auto j = ordered_json::parse(text);
        m.store_version = j.at("store_version").get<int>();
        if (m.store_version != kStoreVersion)
            throw CorruptionError(fmt::format("unsupported store version {}", m.store_version));
        m.corpus_hash = j.at("corpus_hash").get<std::string>();
        if (!j.at("config").is_null()) m.config_json = j.at("config").dump(2) + "\n";
        for (const auto& [name, r] : j.at("stages").items()) {
            StageRecord rec;
            rec.input_key = r.at("input_key").get<std::string>();
            for (const auto& [file, ref] : r.at("outputs").items())
                rec.outputs[file] = {ref.at("path").get<std::string>(), ref.at("sha256").get<std::string>()};
            m.stages[name] = std::move(rec);
        }
    } catch (const ordered_json::exception& e) {
        throw CorruptionError(fmt::format("manifest: {}", e.what()));
    }
    return m;
}

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "stages");
    if (fs::exists(root_ / "manifest.json"))
        reload();
    else
        util::write_file_atomic(root_ / "manifest.json", manifest_.to_json());
}

void ProjectStore::reload() { manifest_ = Manifest::from_json(util::read_file(root_ / "manifest.json")); }

const StageRecord* ProjectStore::stage(std::string_view name) const {
    auto it = manifest_.stages.find(std::string(name));
    return it == manifest_.stages.end() ? nullptr : &it->second;
}

bool ProjectStore::has_output(std::string_view stage_name, std::string_view file) const {
    const auto* rec = stage(stage_name);
    return rec && rec->outputs.contains(std::string(file));
}

std::string ProjectStore::read_output(std::string_view stage_name, std::string_view file) const {
    const auto* rec = stage(stage_name);
    if (!rec) throw DependencyError(fmt::format("stage '{}' has not run", stage_name), std::string(stage_name));
    auto it = rec->outputs.find(std::string(file));
    if (it == rec->outputs.end())
        throw CorruptionError(fmt::format("stage '{}' has no output '{}'", stage_name, file));
    const auto path = root_ / it->second.path;
    if (!fs::exists(path)) throw CorruptionError(fmt::format("missing stage output {}", it->second.path));
    auto content = util::read_file(path);
    if (util::sha256_hex(content) != it->second.sha256)
        throw CorruptionError(fmt::format("hash mismatch for {}", it->second.path));
    return content;
}

void ProjectStore::commit(const std::string& stage_name, const std::string& input_key,
                          const std::map<std::string, std::string>& files, const std::vector<std::string>& drop_list,
                          std::optional<std::string> corpus_hash) {
    StageRecord rec;
    rec.input_key = input_key;
    std::string digest_input;
    for (const auto& [file, content] : files) {
        const auto h = util::sha256_hex(content);
        digest_input += file + '\0' + h + '\n';
        rec.outputs[file] = {"", h};
    }
    const auto dir_name = util::sha256_hex(digest_input).substr(0, 16);
    const auto rel_dir = fs::path("stages") / stage_name / dir_name;
    fs::create_directories(root_ / rel_dir);
    for (const auto& [file, content] : files) {
        const auto rel = rel_dir / file;
        rec.outputs[file].path = rel.generic_string();
        util::write_file_atomic(root_ / rel, content);
    }
    Manifest next = manifest_;
    for (const auto& d : drop_list) next.stages.erase(d);
    next.stages[stage_name] = std::move(rec);
    if (corpus_hash) next.corpus_hash = *corpus_hash;
    publish(std::move(next));
}

void ProjectStore::drop(const std::vector<std::string>& stages) {
    Manifest next = manifest_;
    bool changed = false;
    for (const auto& s : stages) changed |= next.stages.erase(s) > 0;
    if (changed) publish(std::move(next));
}

void ProjectStore::set_config_snapshot(std::string config_json) {
    if (manifest_.config_json == config_json) return;
    Manifest next = manifest_;
    next.config_json = std::move(config_json);
    publish(std::move(next));
}

std::optional<std::string> ProjectStore::config_snapshot() const {
    if (manifest_.config_json.empty()) return std::nullopt;
    return manifest_.config_json;
}

void ProjectStore::publish(Manifest next) {
    util::write_file_atomic(root_ / "manifest.json", next.to_json(), fault_hook_);
    manifest_ = std::move(next);
    collect_garbage();
}

void ProjectStore::collect_garbage() const {
    std::set<fs::path> live;
    for (const auto& [_, rec] : manifest_.stages)
        for (const auto& [__, ref] : rec.outputs) live.insert((root_ / ref.path).parent_path());
    std::error_code ec;
    for (const auto& stage_dir : fs::directory_iterator(root_ / "stages", ec)) {
        if (!stage_dir.is_directory()) continue;
        std::vector<fs::path> dead;
        for (const auto& out_dir : fs::directory_iterator(stage_dir.path()))
            if (!live.contains(out_dir.path())) dead.push_back(out_dir.path());
        for (const auto& d : dead) fs::remove_all(d, ec);
        if (fs::is_empty(stage_dir.path(), ec)) fs::remove(stage_dir.path(), ec);
    }
    fs::remove(root_ / "manifest.json.tmp", ec);
}

void ProjectStore::verify() const {
    for (const auto& [name, rec] : manifest_.stages)
        for (const auto& [file, _] : rec.outputs) read_output(name, file);
}

}  // namespace forge::service

// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/prompts.hpp"

#include <fstream>
#include <sstream>

#include "relassess/digest.hpp"
#include "relassess/errors.hpp"
#include "relassess/serialization.hpp"

namespace relassess {

namespace {

constexpr std::string_view kUserSeparator = "\n=== user ===\n";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read prompt file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Few-shot examples carry queries, requirement lists and labels only.
std::string render_few_shot(const json& doc) {
    std::ostringstream out;
    int index = 1;
    for (const auto& ex : doc.value("examples", json::array())) {
        out << "Example " << index++ << ":\n";
        out << "  Query: " << ex.value("query", "") << "\n";
        if (ex.contains("requirements")) {
            out << "  Requirements:\n";
            for (const auto& r : ex["requirements"]) {
                out << "    - " << r.value("name", "") << ": " << r.value("value", "") << " ("
                    << r.value("importance", "") << ")\n";
            }
        }
        if (ex.contains("product_summary")) out << "  Product: " << ex.value("product_summary", "") << "\n";
        if (ex.contains("label")) out << "  Label: " << ex.value("label", "") << "\n";
    }
    return out.str();
}

}  // namespace

std::string render_slots(std::string_view text, const std::map<std::string, std::string>& slots,
                         std::string_view template_name) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        const auto close = text.find("}}", open + 2);
        if (close == std::string_view::npos) {
            throw ConfigError("unterminated slot in prompt template '" + std::string(template_name) + "'");
        }
        out.append(text.substr(pos, open - pos));
        const std::string name = trim(text.substr(open + 2, close - open - 2));
        auto it = slots.find(name);
        if (it == slots.end()) {
            throw ConfigError("prompt template '" + std::string(template_name) + "' uses unknown slot '" + name + "'");
        }
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

PromptTemplate::PromptTemplate(std::string name, std::string_view content, std::string version)
    : name_(std::move(name)), version_(std::move(version)) {
    const auto sep = content.find(kUserSeparator);
    if (sep == std::string_view::npos) {
        user_ = std::string(content);
    } else {
        system_ = std::string(content.substr(0, sep));
        user_ = std::string(content.substr(sep + kUserSeparator.size()));
    }
}

RenderedPrompt PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
    return {trim(render_slots(system_, slots, name_)), trim(render_slots(user_, slots, name_))};
}

PromptLibrary::PromptLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw ConfigError("prompts directory '" + dir_.string() + "' does not exist");
    const auto few_shot_path = dir_ / "few_shot.json";
    if (std::filesystem::exists(few_shot_path)) {
        few_shot_raw_ = read_file(few_shot_path);
        json doc = json::parse(few_shot_raw_, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("few_shot.json is not valid JSON");
        few_shot_text_ = render_few_shot(doc);
    }
}

const PromptTemplate& PromptLibrary::get(std::string_view step, std::string_view language) {
    const std::string key = std::string(step) + "." + std::string(language);
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    auto path = dir_ / (key + ".txt");
    if (!std::filesystem::exists(path)) path = dir_ / (std::string(step) + ".en.txt");
    const std::string content = read_file(path);
    std::string versioned = content;
    if (content.find("few_shot_examples") != std::string::npos) versioned += few_shot_raw_;
    const std::string version = sha256_hex(versioned).substr(0, 16);
    auto [it, _] = cache_.emplace(key, PromptTemplate(path.filename().string(), content, version));
    return it->second;
}

}  // namespace relassess

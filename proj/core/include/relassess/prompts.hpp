// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace relassess {

struct RenderedPrompt {
    std::string system;
    std::string user;
};

// A step's prompt: a system section and a user section with {{slot}}
// placeholders. On disk the sections are separated by a line "=== user ===".
class PromptTemplate {
  public:
    PromptTemplate(std::string name, std::string_view content, std::string version);

    // Throws ConfigError when the template references a slot not supplied.
    [[nodiscard]] RenderedPrompt render(const std::map<std::string, std::string>& slots) const;

    [[nodiscard]] const std::string& name() const { return name_; }
    // Content hash of the template (and of the few-shot file it embeds).
    [[nodiscard]] const std::string& version() const { return version_; }

  private:
    std::string name_;
    std::string system_;
    std::string user_;
    std::string version_;
};

std::string render_slots(std::string_view text, const std::map<std::string, std::string>& slots,
                         std::string_view template_name);

// Loads "<dir>/<step>.<language>.txt", falling back to English. The optional
// "<dir>/few_shot.json" is rendered into the {{few_shot_examples}} slot.
class PromptLibrary {
  public:
    explicit PromptLibrary(std::filesystem::path dir);

    const PromptTemplate& get(std::string_view step, std::string_view language);
    [[nodiscard]] const std::string& few_shot_text() const { return few_shot_text_; }
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::string few_shot_raw_;
    std::string few_shot_text_;
    std::mutex mutex_;
    std::map<std::string, PromptTemplate> cache_;
};

}  // namespace relassess

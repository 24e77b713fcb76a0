/* Copyright 2026 The Synthforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "synthforge/prompt_agent/template.hpp"

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"

namespace synthforge::prompt_agent {

namespace {

std::size_t count_of(const std::string& text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

void replace_once(std::string& text, std::string_view slot, std::string_view value) {
  if (const auto pos = text.find(slot); pos != std::string::npos) text.replace(pos, slot.size(), value);
}

constexpr const char* kGenerate =
    "Write one prompt for a text-to-image model showing a {class} in a realistic photograph.\n"
    "Requirements:\n"
    "- Background: name a concrete setting, time of day and lighting, and avoid plain studio backdrops.\n"
    "- Pose and state: say what the subject is doing or how it is positioned, occluded or viewed.\n"
    "- Language: a single fluent English sentence of at most 40 words.\n"
    "- Realism: keep the scene physically plausible; it will be scored for realism between 0 and 1.\n"
    "Reply with the prompt only.\n";

constexpr const char* kJudge =
    "You review prompts for a text-to-image model. Target object: {class}.\n"
    "Prompt under review: {prompt}\n"
    "Check that the background is concrete, the pose or state of the object is described, the sentence is "
    "fluent, and the scene could be photographed in the real world.\n"
    "Give a one-line justification. On the final line write only the realism score, a decimal between 0 and 1.\n";

}  // namespace

PromptTemplate::PromptTemplate(std::string text, std::string variant_id)
    : text_(std::move(text)), variant_id_(std::move(variant_id)) {
  const auto classes = count_of(text_, kClassSlot);
  if (classes != 1) {
    throw ConfigError("template '" + variant_id_ + "' must contain exactly one {class} placeholder, found " +
                      std::to_string(classes));
  }
  if (count_of(text_, kPromptSlot) > 1) {
    throw ConfigError("template '" + variant_id_ + "' contains more than one {prompt} placeholder");
  }
}

std::string PromptTemplate::instantiate(std::string_view class_name, std::string_view prompt) const {
  std::string out = text_;
  // Substitute {prompt} first so a prompt that happens to contain "{class}"
  // is left alone.
  const auto class_pos = out.find(kClassSlot);
  const auto prompt_pos = out.find(kPromptSlot);
  if (prompt_pos != std::string::npos && prompt_pos > class_pos) {
    out.replace(prompt_pos, kPromptSlot.size(), prompt);
    replace_once(out, kClassSlot, class_name);
  } else {
    replace_once(out, kClassSlot, class_name);
    if (prompt_pos != std::string::npos) {
      out.replace(prompt_pos, kPromptSlot.size(), prompt);
    }
  }
  return out;
}

PromptTemplate default_generation_template() { return PromptTemplate(kGenerate, "builtin/generate"); }
PromptTemplate default_judge_template() { return PromptTemplate(kJudge, "builtin/judge"); }

TemplateSet load_templates(const std::filesystem::path& dir) {
  TemplateSet set{default_generation_template(), default_judge_template()};
  if (dir.empty()) return set;
  if (!std::filesystem::is_directory(dir)) throw ConfigError("templates directory not found: " + dir.string());
  if (const auto p = dir / "generate.txt"; std::filesystem::exists(p)) {
    set.generate = PromptTemplate(read_file_text(p), p.string());
  }
  if (const auto p = dir / "judge.txt"; std::filesystem::exists(p)) {
    set.judge = PromptTemplate(read_file_text(p), p.string());
  }
  return set;
}

}  // namespace synthforge::prompt_agent

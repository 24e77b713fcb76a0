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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace synthforge::prompt_agent {

// Instruction text with exactly one "{class}" placeholder and at most one
// "{prompt}" placeholder (used by the judge to quote the prompt under review).
class PromptTemplate {
 public:
  // Throws ConfigError when the placeholder counts are wrong.
  PromptTemplate(std::string text, std::string variant_id);

  std::string instantiate(std::string_view class_name, std::string_view prompt = {}) const;

  const std::string& text() const { return text_; }
  const std::string& variant_id() const { return variant_id_; }
  bool has_prompt_slot() const { return text_.find(kPromptSlot) != std::string::npos; }

  static constexpr std::string_view kClassSlot = "{class}";
  static constexpr std::string_view kPromptSlot = "{prompt}";

 private:
  std::string text_;
  std::string variant_id_;
};

PromptTemplate default_generation_template();
PromptTemplate default_judge_template();

struct TemplateSet {
  PromptTemplate generate;
  PromptTemplate judge;
};

// Reads generate.txt and judge.txt from dir, falling back to the built-in
// text for any file that is absent. An empty path yields the built-ins.
TemplateSet load_templates(const std::filesystem::path& dir);

}  // namespace synthforge::prompt_agent

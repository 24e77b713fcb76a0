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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synthforge/backends/provider.hpp"
#include "synthforge/backends/remote.hpp"
#include "synthforge/backends/simulator.hpp"
#include "synthforge/core/config.hpp"

namespace synthforge::backends {

struct ProviderFactoryOptions {
  // Class names the simulator knows how to draw and embed.
  std::vector<std::string> concepts;
  SimulatorFixtures fixtures;
  // Response cache for remote providers; none when empty.
  std::optional<std::filesystem::path> cache_root;
  // Network seam for remote providers; defaults to the HTTP client.
  std::shared_ptr<HttpTransport> transport;
  Sleeper sleeper = real_sleeper();
};

// Builds the three provider roles. Each simulated role gets its own model
// seeded from its descriptor; remote roles share nothing but the transport.
ProviderSet make_providers(const ProviderSettings& settings, const ProviderFactoryOptions& options);

}  // namespace synthforge::backends

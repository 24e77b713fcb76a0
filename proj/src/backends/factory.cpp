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

#include "synthforge/backends/factory.hpp"

#include "synthforge/backends/cache.hpp"
#include "synthforge/core/errors.hpp"

namespace synthforge::backends {

namespace {

std::shared_ptr<const SimulatorModel> simulator_for(const ProviderDescriptor& d, std::size_t dim,
                                                    const ProviderFactoryOptions& options) {
  SimulatorState state;
  state.seed = d.seed.value_or(0);
  state.embedding_dim = dim;
  state.concepts = options.concepts;
  state.fixtures = options.fixtures;
  return std::make_shared<const SimulatorModel>(std::move(state));
}

std::shared_ptr<RemoteClient> client_for(const ProviderDescriptor& d, const ProviderFactoryOptions& options,
                                         std::shared_ptr<HttpTransport>& transport) {
  if (!transport) transport = options.transport ? options.transport : make_http_transport();
  return std::make_shared<RemoteClient>(d, transport, make_adapter(d.adapter), options.sleeper);
}

}  // namespace

ProviderSet make_providers(const ProviderSettings& settings, const ProviderFactoryOptions& options) {
  settings.text.validate();
  settings.image.validate();
  settings.embedding.validate();
  const std::size_t dim = settings.embedding.embedding_dim;
  std::shared_ptr<HttpTransport> transport;
  ProviderSet set;

  if (settings.text.simulated()) {
    set.text = std::make_shared<SimulatedTextGenerator>(simulator_for(settings.text, dim, options), settings.text);
  } else {
    set.text = std::make_shared<RemoteTextGenerator>(client_for(settings.text, options, transport));
    if (options.cache_root) set.text = std::make_shared<CachingTextGenerator>(set.text, *options.cache_root);
  }

  if (settings.image.simulated()) {
    set.image =
        std::make_shared<SimulatedImageGenerator>(simulator_for(settings.image, dim, options), settings.image);
  } else {
    set.image = std::make_shared<RemoteImageGenerator>(client_for(settings.image, options, transport));
    if (options.cache_root) set.image = std::make_shared<CachingImageGenerator>(set.image, *options.cache_root);
  }

  if (settings.embedding.simulated()) {
    set.embedder = std::make_shared<SimulatedEmbedder>(simulator_for(settings.embedding, dim, options),
                                                       settings.embedding);
  } else {
    set.embedder = std::make_shared<RemoteEmbedder>(client_for(settings.embedding, options, transport));
    if (options.cache_root) set.embedder = std::make_shared<CachingEmbedder>(set.embedder, *options.cache_root);
  }
  return set;
}

}  // namespace synthforge::backends

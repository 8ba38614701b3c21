//! Backends named by the run configuration.

use std::sync::Arc;

use hems_agent::PolicyGenerator;
use hems_eval::UserProvider;
use hems_gateway::{Embedder, RemoteEmbedder, RemoteGenerator, TextGenerator, ToyEmbedder};

use crate::config::{EmbeddingConfig, ProviderConfig};
use crate::error::CliError;

pub fn agent_generator(provider: &ProviderConfig) -> Result<Arc<dyn TextGenerator>, CliError> {
    Ok(match provider {
        ProviderConfig::Scripted => Arc::new(PolicyGenerator::default()),
        ProviderConfig::Remote(r) => Arc::new(RemoteGenerator::new(r)?),
    })
}

pub fn user_provider(provider: &ProviderConfig) -> Result<UserProvider, CliError> {
    Ok(match provider {
        ProviderConfig::Scripted => UserProvider::Scripted,
        ProviderConfig::Remote(r) => UserProvider::Llm(Arc::new(RemoteGenerator::new(r)?)),
    })
}

pub fn embedder(config: &EmbeddingConfig) -> Result<Box<dyn Embedder>, CliError> {
    Ok(match config {
        EmbeddingConfig::Toy { dimension } => Box::new(ToyEmbedder::with_dimension(*dimension)),
        EmbeddingConfig::Remote {
            dimension,
            endpoint,
        } => Box::new(RemoteEmbedder::new(endpoint, *dimension)?),
    })
}

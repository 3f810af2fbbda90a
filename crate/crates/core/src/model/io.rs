use std::path::Path;

use super::{ModelDocument, ModelError, NetworkModel, ScenarioConfig};

pub fn parse_model(json: &str) -> Result<(NetworkModel, ScenarioConfig), ModelError> {
    let doc: ModelDocument = serde_json::from_str(json)?;
    NetworkModel::from_document(doc)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(NetworkModel, ScenarioConfig), ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

pub fn to_json(model: &NetworkModel, config: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(&model.to_document(config))
        .expect("model documents always serialize");
    s.push('\n');
    s
}

pub fn write_model(
    model: &NetworkModel,
    config: &ScenarioConfig,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    std::fs::write(path, to_json(model, config))
}

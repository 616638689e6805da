//! The shipped task catalog.
//!
//! Task files live under `catalog/v1/` and are embedded at compile time. The
//! catalog version is part of every dataset manifest: changing a task file
//! changes generated content, so it requires a new version directory.

use std::sync::{Arc, OnceLock};

use crate::error::{GenerateError, GraphError};
use crate::graph::TaskGraph;
use crate::response::OutputSpace;
use crate::taskfile::{parse_task_file, GeneratorKind};

pub const CATALOG_VERSION: &str = "v1";

const SOURCES: &[(&str, &str)] = &[
    ("AndCompareColor", include_str!("../catalog/v1/AndCompareColor.task")),
    ("AndCompareShape", include_str!("../catalog/v1/AndCompareShape.task")),
    ("AndExistColorGo", include_str!("../catalog/v1/AndExistColorGo.task")),
    ("AndExistGo", include_str!("../catalog/v1/AndExistGo.task")),
    ("AndExistShapeGo", include_str!("../catalog/v1/AndExistShapeGo.task")),
    (
        "AndSimpleCompareColor",
        include_str!("../catalog/v1/AndSimpleCompareColor.task"),
    ),
    (
        "AndSimpleCompareShape",
        include_str!("../catalog/v1/AndSimpleCompareShape.task"),
    ),
    (
        "AndSimpleExistColorGo",
        include_str!("../catalog/v1/AndSimpleExistColorGo.task"),
    ),
    ("AndSimpleExistGo", include_str!("../catalog/v1/AndSimpleExistGo.task")),
    (
        "AndSimpleExistShapeGo",
        include_str!("../catalog/v1/AndSimpleExistShapeGo.task"),
    ),
    ("CompareColor", include_str!("../catalog/v1/CompareColor.task")),
    ("CompareShape", include_str!("../catalog/v1/CompareShape.task")),
    ("Exist", include_str!("../catalog/v1/Exist.task")),
    ("ExistColor", include_str!("../catalog/v1/ExistColor.task")),
    ("ExistColorGo", include_str!("../catalog/v1/ExistColorGo.task")),
    ("ExistColorOf", include_str!("../catalog/v1/ExistColorOf.task")),
    ("ExistColorSpace", include_str!("../catalog/v1/ExistColorSpace.task")),
    ("ExistGetColor", include_str!("../catalog/v1/ExistGetColor.task")),
    ("ExistGetShape", include_str!("../catalog/v1/ExistGetShape.task")),
    ("ExistGo", include_str!("../catalog/v1/ExistGo.task")),
    ("ExistGoOrColor", include_str!("../catalog/v1/ExistGoOrColor.task")),
    (
        "ExistLastColorSameShape",
        include_str!("../catalog/v1/ExistLastColorSameShape.task"),
    ),
    (
        "ExistLastObjectSameObject",
        include_str!("../catalog/v1/ExistLastObjectSameObject.task"),
    ),
    (
        "ExistLastShapeSameColor",
        include_str!("../catalog/v1/ExistLastShapeSameColor.task"),
    ),
    ("ExistShape", include_str!("../catalog/v1/ExistShape.task")),
    ("ExistShapeGo", include_str!("../catalog/v1/ExistShapeGo.task")),
    ("ExistShapeOf", include_str!("../catalog/v1/ExistShapeOf.task")),
    ("ExistShapeSpace", include_str!("../catalog/v1/ExistShapeSpace.task")),
    ("ExistSpace", include_str!("../catalog/v1/ExistSpace.task")),
    ("GetColor", include_str!("../catalog/v1/GetColor.task")),
    ("GetColorSpace", include_str!("../catalog/v1/GetColorSpace.task")),
    ("GetShape", include_str!("../catalog/v1/GetShape.task")),
    ("GetShapeSpace", include_str!("../catalog/v1/GetShapeSpace.task")),
    ("Go", include_str!("../catalog/v1/Go.task")),
    ("GoColor", include_str!("../catalog/v1/GoColor.task")),
    ("GoColorOf", include_str!("../catalog/v1/GoColorOf.task")),
    ("GoShape", include_str!("../catalog/v1/GoShape.task")),
    ("GoShapeOf", include_str!("../catalog/v1/GoShapeOf.task")),
    ("GoSpace", include_str!("../catalog/v1/GoSpace.task")),
    (
        "SimpleCompareColor",
        include_str!("../catalog/v1/SimpleCompareColor.task"),
    ),
    (
        "SimpleCompareShape",
        include_str!("../catalog/v1/SimpleCompareShape.task"),
    ),
    (
        "SimpleExistColorGo",
        include_str!("../catalog/v1/SimpleExistColorGo.task"),
    ),
    ("SimpleExistGo", include_str!("../catalog/v1/SimpleExistGo.task")),
    (
        "SimpleExistShapeGo",
        include_str!("../catalog/v1/SimpleExistShapeGo.task"),
    ),
];

#[derive(Clone, Debug)]
pub struct CatalogTask {
    pub name: String,
    pub family: String,
    pub generator: GeneratorKind,
    pub graph: Arc<TaskGraph>,
    pub source: String,
}

impl CatalogTask {
    pub fn output_space(&self) -> OutputSpace {
        self.graph.output_space_of(self.graph.root())
    }
}

#[derive(Clone, Debug)]
pub struct Catalog {
    version: String,
    tasks: Vec<CatalogTask>,
}

impl Catalog {
    /// The embedded catalog, parsed once.
    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Catalog::from_sources(CATALOG_VERSION, SOURCES.iter().copied()).expect("embedded catalog is valid")
        })
    }

    /// Parses `(name, text)` task files. Each file must declare the task
    /// name it is stored under.
    pub fn from_sources<'a>(
        version: &str,
        sources: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Catalog, GraphError> {
        let mut tasks: Vec<CatalogTask> = Vec::new();
        for (name, text) in sources {
            let file = parse_task_file(text)?;
            if file.name != name {
                return Err(GraphError::Catalog(format!(
                    "file `{name}` declares task `{}`",
                    file.name
                )));
            }
            if tasks.iter().any(|t| t.name == name) {
                return Err(GraphError::Catalog(format!("duplicate task `{name}`")));
            }
            tasks.push(CatalogTask {
                graph: Arc::new(file.build()?),
                name: file.name,
                family: file.family,
                generator: file.generator,
                source: text.to_string(),
            });
        }
        Ok(Catalog {
            version: version.to_string(),
            tasks,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn tasks(&self) -> &[CatalogTask] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&CatalogTask> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.tasks.iter().map(|t| t.name.as_str()).collect()
    }

    /// Resolves a task list; `["all"]` (or an empty list) means the whole
    /// catalog. Returned tasks keep catalog order.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<&CatalogTask>, GenerateError> {
        if names.is_empty() || (names.len() == 1 && names[0].as_ref() == "all") {
            return Ok(self.tasks.iter().collect());
        }
        for n in names {
            if self.get(n.as_ref()).is_none() {
                return Err(GenerateError::UnknownTask(n.as_ref().to_string()));
            }
        }
        Ok(self
            .tasks
            .iter()
            .filter(|t| names.iter().any(|n| n.as_ref() == t.name))
            .collect())
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use semirender::mapping::io::{load_map, save_map};
use semirender::pipeline::{
    compare_methods, decode_shape, evaluate_columns, fit_mapping, generate_dataset, heatmap, pretrain,
    reconstruct_columns, write_atomic, Config, Dataset, MappingModel, Method, Split, Subspaces,
};
use semirender::render::{render_depth, Pose};
use semirender::shapes::io::{load_ply, load_voxr, save_ply, save_voxr, write_ply};
use semirender::shapes::Shape;
use semirender::subspace::io::{load_ssm, save_ssm};
use semirender::{Error, Result};

use crate::{Command, Common};

const IMAGE_MODEL: &str = "image.ssm";
const SHAPE_MODEL: &str = "shape.ssm";

fn load_config(common: &Common) -> Result<Config> {
    let config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    Ok(match common.seed {
        Some(seed) => config.with_seed(seed),
        None => config,
    })
}

fn map_file(method: Method) -> String {
    format!("map_{method}.map")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))
}

fn load_models(dir: &Path) -> Result<Subspaces> {
    Ok(Subspaces {
        image: with_path(&dir.join(IMAGE_MODEL), load_ssm(&dir.join(IMAGE_MODEL)))?,
        shape: with_path(&dir.join(SHAPE_MODEL), load_ssm(&dir.join(SHAPE_MODEL)))?,
    })
}

/// Names the file in I/O errors, which otherwise carry only the OS message.
fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::InvalidInput(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn parse_split(s: &str) -> Result<Split> {
    match s {
        "test" => Ok(Split::PairedTest),
        "train" => Ok(Split::PairedTrain),
        other => Err(Error::InvalidInput(format!("unknown split `{other}` (expected test or train)"))),
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { common, out } => {
            let config = load_config(&common)?;
            let manifest = generate_dataset(&config.dataset, &out)?;
            for (split, n) in &manifest.counts {
                info!("{split}: {n} rows");
            }
            Ok(())
        }
        Command::Pretrain { common, data, out } => {
            let config = load_config(&common)?;
            let dataset = Dataset::open(&data)?;
            let models = pretrain(&dataset, config.experiment.k_2d, config.experiment.k_3d)?;
            create_dir(&out)?;
            save_ssm(&out.join(IMAGE_MODEL), &models.image)?;
            save_ssm(&out.join(SHAPE_MODEL), &models.shape)
        }
        Command::Fit { common, data, models, out, method } => {
            let config = load_config(&common)?;
            let method = method.unwrap_or(config.experiment.method);
            let subspaces = load_models(models.as_deref().unwrap_or(&out))?;
            let train = Dataset::open(&data)?.paired(Split::PairedTrain)?;
            let mapping = fit_mapping(method, &config.experiment, &subspaces, &train)?;
            create_dir(&out)?;
            save_map(&out.join(map_file(method)), &mapping.to_mlp())
        }
        Command::Eval { common, data, models, out, method, split } => {
            let config = load_config(&common)?;
            let method = method.unwrap_or(config.experiment.method);
            let split_name = split.clone();
            let split = parse_split(&split)?;
            let model_dir = models.unwrap_or_else(|| out.clone());
            let subspaces = load_models(&model_dir)?;
            let map_path = model_dir.join(map_file(method));
            let mapping = MappingModel::from_mlp(method, with_path(&map_path, load_map(&map_path))?)?;
            eval(&config, &data, &subspaces, &mapping, split, &split_name, &out)
        }
        Command::Compare { common, data, out } => {
            let config = load_config(&common)?;
            let dataset = Dataset::open(&data)?;
            let exp = &config.experiment;
            let models = pretrain(&dataset, exp.k_2d, exp.k_3d)?;
            let train = dataset.paired(Split::PairedTrain)?;
            let test = dataset.paired(Split::PairedTest)?;
            let mut report = compare_methods(exp, &models, &train, &test)?;
            report.config = Config { dataset: dataset.config().clone(), experiment: exp.clone() }.to_toml();
            create_dir(&out)?;
            write_atomic(&out.join("comparison.csv"), report.to_csv().as_bytes())?;
            write_atomic(&out.join("comparison.txt"), report.summary().as_bytes())?;
            print!("{}", report.to_csv());
            Ok(())
        }
        Command::Render { input, out, yaw, size } => {
            if size == 0 {
                return Err(Error::InvalidInput("image size must be positive".into()));
            }
            let shape = load_shape(&input)?;
            render_depth(&shape, Pose::from_degrees(yaw), size, size).save_pgm(&out)
        }
        Command::Heatmap { prediction, truth, mode, out } => {
            let pred = with_path(&prediction, load_ply(&prediction))?.cloud;
            let truth = with_path(&truth, load_ply(&truth))?.cloud;
            let map = heatmap(&pred, &truth, mode)?;
            let mut bytes = Vec::new();
            write_ply(&mut bytes, &truth, Some(("error", &map.values)))?;
            write_atomic(&out, &bytes)?;
            println!("mode={} points={} mean={} max={}", map.mode, map.values.len(), map.mean(), map.max());
            Ok(())
        }
        Command::Inspect { path } => {
            print!("{}", with_path(&path, crate::inspect::inspect(&path))?);
            Ok(())
        }
    }
}

fn load_shape(path: &Path) -> Result<Shape> {
    with_path(path, read_shape(path))
}

fn read_shape(path: &Path) -> Result<Shape> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => Ok(Shape::Cloud(load_ply(path)?.cloud)),
        Some("voxr") => Ok(Shape::Voxels(load_voxr(path)?)),
        _ => Err(Error::InvalidInput(format!(
            "{}: expected a .ply or .voxr shape file",
            path.display()
        ))),
    }
}

fn eval(
    config: &Config,
    data: &Path,
    models: &Subspaces,
    mapping: &MappingModel,
    split: Split,
    split_name: &str,
    out: &Path,
) -> Result<()> {
    let dataset = Dataset::open(data)?;
    let paired = dataset.paired(split)?;
    let predictions = reconstruct_columns(models, mapping, &paired.images)?;
    let mut report = evaluate_columns(&predictions, &paired.shapes)?;
    report.labels = paired.labels.clone();
    report.config = Config { dataset: dataset.config().clone(), experiment: config.experiment.clone() }.to_toml();

    let method = mapping.method();
    let pred_dir: PathBuf = out.join(format!("predictions_{method}_{split_name}"));
    create_dir(&pred_dir)?;
    let family = dataset.config().family;
    for (j, label) in paired.labels.iter().enumerate() {
        let shape = decode_shape(family, &predictions.column(j), dataset.config())?;
        let path = pred_dir.join(format!("{label}.{}", family.extension()));
        match shape {
            Shape::Cloud(c) => save_ply(&path, &c, None)?,
            Shape::Voxels(g) => save_voxr(&path, &g)?,
        }
    }
    let stem = format!("eval_{method}_{split_name}");
    write_atomic(&out.join(format!("{stem}.csv")), report.to_csv().as_bytes())?;
    write_atomic(&out.join(format!("{stem}.txt")), report.summary().as_bytes())?;
    println!("{method} {split_name} average_rmse={}", report.average_rmse);
    Ok(())
}

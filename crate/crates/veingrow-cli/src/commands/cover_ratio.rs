//! `veingrow cover-ratio`: rasterized-IoU upper bounds of the vein
//! reconstruction against the source masks, swept over design complexities,
//! with and without minor-vein refinement.

use std::fs;

use serde_json::json;

use veingrow::corpus::cover_ratio_sweep;

use super::{ensure_out_dir, load_corpus, metadata_value, validate, with_pool, write_metadata};
use crate::{CliError, CorpusArgs};

pub fn run(args: &CorpusArgs) -> Result<(), CliError> {
    validate(args)?;
    let records = load_corpus(args)?;
    ensure_out_dir(&args.out)?;

    let (rows, failures) = with_pool(args.workers, || {
        cover_ratio_sweep(&records, &args.complexities, args.depth, args.supersample)
    });

    let mut csv = String::from("complexity,method,mean_iou,median_iou,p10_iou,instance_count\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{}\n",
            row.complexity,
            row.method.as_str(),
            row.mean_iou,
            row.median_iou,
            row.p10_iou,
            row.instance_count
        ));
    }
    fs::write(args.out.join("cover_ratio.csv"), &csv)?;

    for f in &failures {
        log::warn!("instance {} skipped: {}", f.instance_id, f.reason);
    }
    let meta = metadata_value(
        "cover-ratio",
        args,
        json!({
            "instances": records.len(),
            "failed_instances": failures
                .iter()
                .map(|f| json!({"instance_id": f.instance_id, "reason": f.reason}))
                .collect::<Vec<_>>(),
        }),
    );
    write_metadata(&args.out.join("cover_ratio_meta.json"), &meta)?;

    for row in &rows {
        println!(
            "complexity {:>3} {:>10}: mean {:.4} median {:.4} p10 {:.4} over {} instances",
            row.complexity,
            row.method.as_str(),
            row.mean_iou,
            row.median_iou,
            row.p10_iou,
            row.instance_count
        );
    }
    Ok(())
}

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoocvOptions {
    /// Run folds whose training part holds a single class instead of failing.
    pub allow_single_class_folds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPrediction<P> {
    /// Held-out sample.
    pub index: usize,
    pub prediction: P,
    /// The training part of this fold held fewer than two classes.
    pub degenerate: bool,
}

/// Leave-one-out cross-validation.
///
/// For every sample `i`, `train` receives the indices of all other samples
/// and `classify` is called with the trained model and `i`. Neither closure
/// is told the held-out label. Folds run concurrently; results come back in
/// sample order.
pub fn loocv<M, P, Tr, Cl>(
    labels: &[usize],
    opts: LoocvOptions,
    train: Tr,
    classify: Cl,
) -> Result<Vec<FoldPrediction<P>>>
where
    Tr: Fn(&[usize]) -> Result<M> + Sync,
    Cl: Fn(&M, usize) -> Result<P> + Sync,
    P: Send,
{
    if labels.len() < 2 {
        return Err(Error::invalid("cross-validation needs at least two samples"));
    }
    let first = labels[0];
    if labels.iter().all(|&l| l == first) {
        return Err(Error::invalid("cross-validation needs both classes"));
    }
    (0..labels.len())
        .into_par_iter()
        .map(|i| {
            let training: Vec<usize> = (0..labels.len()).filter(|&j| j != i).collect();
            let t0 = labels[training[0]];
            let degenerate = training.iter().all(|&j| labels[j] == t0);
            let wrap = |e: Error| Error::Fold {
                index: i,
                source: Box::new(e),
            };
            if degenerate {
                if !opts.allow_single_class_folds {
                    return Err(wrap(Error::Degenerate("training fold holds a single class".into())));
                }
                log::warn!("fold {i}: training fold holds a single class");
            }
            let model = train(&training).map_err(wrap)?;
            let prediction = classify(&model, i).map_err(wrap)?;
            Ok(FoldPrediction {
                index: i,
                prediction,
                degenerate,
            })
        })
        .collect()
}

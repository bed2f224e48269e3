use log::{debug, info};

use crate::confidence::{partition, predict, PartitionSets, Prediction};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::accuracy;
use crate::lur::steps::{relearn_agreement_step, relearn_mixup_step, unlearn_step};
use crate::lur::trace::{Phase, PhaseTrace, TraceRow};
use crate::lur::LurConfig;
use crate::nn::MlpParams;
use crate::rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct ColurOutput {
    pub student: MlpParams,
    pub teacher: MlpParams,
    pub trace: PhaseTrace,
}

/// Called with `(iteration, student, teacher)` after every completed
/// iteration.
pub type IterationHook<'a> = dyn FnMut(usize, &MlpParams, &MlpParams) -> Result<()> + 'a;

/// Restoration loop. Optional `monitor` data only feeds the trace's accuracy
/// column; it never influences training.
pub struct Colur<'a> {
    cfg: LurConfig,
    monitor: Option<&'a Dataset>,
    hook: Option<Box<IterationHook<'a>>>,
}

fn labels_at(preds: &[Prediction], idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|&i| preds[i].label).collect()
}

impl<'a> Colur<'a> {
    pub fn new(cfg: LurConfig) -> Self {
        Colur {
            cfg,
            monitor: None,
            hook: None,
        }
    }

    pub fn with_monitor(mut self, test: &'a Dataset) -> Self {
        self.monitor = Some(test);
        self
    }

    pub fn with_hook(mut self, hook: impl FnMut(usize, &MlpParams, &MlpParams) -> Result<()> + 'a) -> Self {
        self.hook = Some(Box::new(hook));
        self
    }

    fn record(&self, trace: &mut PhaseTrace, mut row: TraceRow, loss: Option<f64>, student: &MlpParams) -> Result<()> {
        row.loss = loss;
        if let Some(test) = self.monitor {
            row.test_accuracy = Some(accuracy(student, test)?);
        }
        debug!("{row:?}");
        trace.rows.push(row);
        Ok(())
    }

    /// Runs the configured number of iterations. The teacher starts as a copy
    /// of `theta0`; the returned student is the refined model.
    ///
    /// Only the features of `du` are used: targets come from the two models'
    /// predictions, never from the observed labels.
    pub fn run(mut self, theta_u: &MlpParams, theta0: &MlpParams, du: &Dataset) -> Result<ColurOutput> {
        let cfg = self.cfg.clone();
        cfg.validate()?;
        if theta_u.layer_sizes() != theta0.layer_sizes() {
            return Err(Error::config(format!(
                "student {:?} and teacher {:?} architectures differ",
                theta_u.layer_sizes(),
                theta0.layer_sizes()
            )));
        }
        if du.dims() != theta_u.input_dim() || du.classes() != theta_u.classes() {
            return Err(Error::config("dataset does not match the model"));
        }
        let x: &Tensor = du.features();
        let mut student = theta_u.clone();
        let mut teacher = theta0.clone();
        let mut trace = PhaseTrace::default();
        let t = cfg.toggles;

        for it in 0..cfg.iterations {
            let phase_stream = |p: Phase| rng::stream(cfg.seed, &[rng::tag("colur"), it as u64, rng::tag(p.as_str())]);

            let mut preds_t = predict(&teacher, x)?;
            let mut preds_u = predict(&student, x)?;
            let sets: PartitionSets = partition(&preds_t, &preds_u, cfg.tau)?;
            if sets.is_empty() {
                trace.notes.push(format!("iteration {it}: all partition sets empty; stopping"));
                break;
            }
            self.record(&mut trace, TraceRow::new(it, Phase::Partition, &sets), None, &student)?;

            let sets = if t.unlearn {
                let idx = &sets.high_disagree;
                let xs = x.select_rows(idx);
                let loss = unlearn_step(
                    &mut student,
                    &xs,
                    &labels_at(&preds_u, idx),
                    cfg.lambda_u,
                    &cfg,
                    &mut phase_stream(Phase::Unlearn),
                )?;
                if cfg.teacher_unlearn {
                    unlearn_step(
                        &mut teacher,
                        &xs,
                        &labels_at(&preds_t, idx),
                        cfg.lambda_t,
                        &cfg,
                        &mut rng::stream(cfg.seed, &[rng::tag("colur"), it as u64, rng::tag("teacher_unlearn")]),
                    )?;
                    preds_t = predict(&teacher, x)?;
                }
                self.record(&mut trace, TraceRow::new(it, Phase::Unlearn, &sets), loss, &student)?;
                preds_u = predict(&student, x)?;
                let again = partition(&preds_t, &preds_u, cfg.tau)?;
                self.record(&mut trace, TraceRow::new(it, Phase::Repartition, &again), None, &student)?;
                again
            } else {
                sets
            };

            if t.mixup {
                let loss = relearn_mixup_step(
                    &mut student,
                    &mut teacher,
                    x,
                    &sets.low(),
                    &sets.high_agree,
                    &preds_t,
                    &preds_u,
                    &cfg,
                    &mut phase_stream(Phase::RelearnMixup),
                )?;
                self.record(&mut trace, TraceRow::new(it, Phase::RelearnMixup, &sets), loss.student, &student)?;
            }

            if t.smooth {
                let idx = &sets.high_agree;
                let loss = relearn_agreement_step(
                    &mut student,
                    &mut teacher,
                    &x.select_rows(idx),
                    &labels_at(&preds_u, idx),
                    &cfg,
                    &mut phase_stream(Phase::RelearnAgree),
                )?;
                self.record(&mut trace, TraceRow::new(it, Phase::RelearnAgree, &sets), loss.student, &student)?;
            }

            if let Some(hook) = self.hook.as_mut() {
                hook(it, &student, &teacher)?;
            }
            info!(
                "iteration {it}: |S_tau|={} |S_low|={} |A_tau|={} |A_low|={}",
                sets.high_disagree.len(),
                sets.low_disagree.len(),
                sets.high_agree.len(),
                sets.low_agree.len()
            );
        }
        Ok(ColurOutput {
            student,
            teacher,
            trace,
        })
    }
}

/// Convenience wrapper without monitoring or hooks.
pub fn run_colur(theta_u: &MlpParams, theta0: &MlpParams, du: &Dataset, cfg: &LurConfig) -> Result<ColurOutput> {
    Colur::new(cfg.clone()).run(theta_u, theta0, du)
}

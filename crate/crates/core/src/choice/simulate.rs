use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{reference_coding, softmax, ChoiceObservation, PartWorths};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::ratings::csv_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_respondents: usize,
    pub seed: u64,
    /// Shuffle task order and alternative order per respondent.
    pub randomize_order: bool,
}

impl SimConfig {
    pub fn new(n_respondents: usize, seed: u64) -> Self {
        Self {
            n_respondents,
            seed,
            randomize_order: false,
        }
    }
}

pub(crate) fn respondent_id(index: usize) -> String {
    format!("r{:04}", index + 1)
}

/// Draws one choice per respondent and task from the logit probabilities.
///
/// Each respondent gets its own generator stream derived from
/// `(seed, respondent index)`, so results do not depend on evaluation order.
pub fn simulate_choices(design: &Design, beta: &PartWorths, config: SimConfig) -> Result<Vec<ChoiceObservation>> {
    if config.n_respondents == 0 {
        return Err(Error::invalid("simulation needs at least one respondent"));
    }
    let attrs = design.attributes();
    let probs: Vec<Vec<f64>> = design
        .choice_sets()
        .iter()
        .map(|cs| {
            let u: Vec<f64> = cs
                .0
                .iter()
                .map(|id| {
                    let row = reference_coding(attrs, &design.profile(*id).unwrap().levels);
                    super::deterministic_utility(&row, beta)
                })
                .collect::<Result<_>>()?;
            Ok(softmax(&u))
        })
        .collect::<Result<_>>()?;

    let m = design.m();
    let mut out = Vec::with_capacity(config.n_respondents * design.n_sets());
    for r in 0..config.n_respondents {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let mut tasks: Vec<usize> = (0..design.n_sets()).collect();
        if config.randomize_order {
            tasks.shuffle(&mut rng);
        }
        for s in tasks {
            let mut shown: Vec<usize> = (0..m).collect();
            if config.randomize_order {
                shown.shuffle(&mut rng);
            }
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = shown[m - 1];
            for &alt in &shown {
                acc += probs[s][alt];
                if u < acc {
                    chosen = alt;
                    break;
                }
            }
            out.push(ChoiceObservation {
                respondent_id: respondent_id(r),
                choice_set_index: s,
                chosen_alternative: chosen,
            });
        }
    }
    Ok(out)
}

pub fn write_observations_csv<W: Write>(writer: W, obs: &[ChoiceObservation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for o in obs {
        w.serialize(o).map_err(|e| csv_error("observations", e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `respondent_id,choice_set_index,chosen_alternative`.
pub fn read_observations_csv<R: Read>(reader: R) -> Result<Vec<ChoiceObservation>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error("observations", e))?.clone();
    let want = ["respondent_id", "choice_set_index", "chosen_alternative"];
    if headers.len() != 3 || headers.iter().zip(want).any(|(h, w)| h.trim() != w) {
        return Err(Error::Parse {
            context: "observations".into(),
            line: 1,
            message: "expected header respondent_id,choice_set_index,chosen_alternative".into(),
        });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let o: ChoiceObservation = row.map_err(|e| csv_error("observations", e))?;
        out.push(o);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("observations file has no records".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_choice_sets, enumerate_full_factorial, SearchConfig};
    use crate::presets;

    fn study_design() -> Design {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        build_choice_sets(&attrs, &profiles, SearchConfig::default()).unwrap()
    }

    #[test]
    fn dominant_level_always_wins() {
        let d = study_design();
        // mean 4.3 is worth 50: every set holds exactly one profile with it
        let beta = PartWorths::from_values(d.attributes(), &[0.0, 0.0, 50.0, 0.0, 0.0]).unwrap();
        let obs = simulate_choices(&d, &beta, SimConfig::new(20, 3)).unwrap();
        for o in obs {
            let id = d.choice_sets()[o.choice_set_index].0[o.chosen_alternative];
            assert_eq!(d.profile(id).unwrap().levels[2], 1);
        }
    }

    #[test]
    fn zero_beta_is_a_fair_coin() {
        let d = study_design();
        let beta = PartWorths::zeros(d.attributes());
        let obs = simulate_choices(&d, &beta, SimConfig::new(625, 9)).unwrap();
        assert_eq!(obs.len(), 10_000);
        let first = obs.iter().filter(|o| o.chosen_alternative == 0).count() as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&first), "share {first}");
    }

    #[test]
    fn same_seed_same_choices() {
        let d = study_design();
        let beta = PartWorths::from_values(d.attributes(), &presets::WHOLE_SAMPLE_BETAS).unwrap();
        let mut cfg = SimConfig::new(5, 42);
        cfg.randomize_order = true;
        let a = simulate_choices(&d, &beta, cfg).unwrap();
        assert_eq!(a, simulate_choices(&d, &beta, cfg).unwrap());
        cfg.seed = 43;
        assert_ne!(a, simulate_choices(&d, &beta, cfg).unwrap());
    }

    #[test]
    fn observations_csv_round_trip() {
        let obs = vec![ChoiceObservation {
            respondent_id: "r1".into(),
            choice_set_index: 3,
            chosen_alternative: 1,
        }];
        let mut buf = Vec::new();
        write_observations_csv(&mut buf, &obs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "respondent_id,choice_set_index,chosen_alternative\nr1,3,1\n");
        assert_eq!(read_observations_csv(text.as_bytes()).unwrap(), obs);
        assert!(read_observations_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}

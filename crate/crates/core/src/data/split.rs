use rand::seq::SliceRandom;

use crate::data::{floor_fraction, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// Class-stratified split: `⌊ratio · N_c⌋` samples of every class go to the
/// first part, chosen uniformly per class. Both parts keep the input order.
pub fn split(dataset: &Dataset, ratio_initial: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio_initial > 0.0 && ratio_initial < 1.0) {
        return Err(Error::config(format!("split ratio must lie in (0, 1), got {ratio_initial}")));
    }
    let mut stream = rng::stream(seed, &[rng::tag("split")]);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.classes()];
    for (i, &y) in dataset.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    let mut in_first = vec![false; dataset.len()];
    for members in &mut by_class {
        let take = floor_fraction(ratio_initial, members.len());
        members.shuffle(&mut stream);
        for &i in &members[..take] {
            in_first[i] = true;
        }
    }
    let (first, second): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| in_first[i]);
    if first.is_empty() || second.is_empty() {
        return Err(Error::config(format!(
            "split ratio {ratio_initial} leaves an empty part ({} / {})",
            first.len(),
            second.len()
        )));
    }
    Ok((dataset.subset(&first), dataset.subset(&second)))
}

//! Published EU-SILC marginals and engineered datasets for tests and demos.
//!
//! The seven low-entropy variables carry their published category
//! frequencies. The twelve remaining variables have no published marginals;
//! they get geometric profiles chosen so their entropy scores land on the
//! published ones. They are stand-ins, not survey data.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{CategoricalDataset, Marginal, VariableKind, VariableSpec};
use crate::rng;
use crate::Result;

/// Published entropy score of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScore {
    pub acronym: &'static str,
    pub description: &'static str,
    pub score: f64,
    pub atypical: bool,
}

pub const REFERENCE_SCORES: [ReferenceScore; 19] = [
    r("VIFAM", "Lived within the household for the whole 2019", 0.951527, true),
    r("SECITT", "Secondary Citizenship (if applicable)", 0.874917, true),
    r("SEV_MAT_DEPRIV", "Severity of material deprivation", 0.804957, true),
    r("TIPSCU", "Type of school attended (if applicable)", 0.737139, true),
    r("CITTADX", "Italian Citizenship", 0.725303, true),
    r("NCITT", "Italian citizen from birth", 0.714841, true),
    r("ITA", "Continuous residence in Italy", 0.657279, true),
    r("RISKPOV", "Risk of poverty indicator", 0.498129, false),
    r("RAGA017", "Number of minor Children within the household", 0.459679, false),
    r("DON1555", "Number of women aged 15-55", 0.405058, false),
    r("POV_SOC_EXCL", "Social exclusion due to poverty", 0.375726, false),
    r("FONTERED", "Source of income or funding", 0.288991, false),
    r("STACIV", "Civil status", 0.270583, false),
    r("LOW_WORK_INT", "Indicator of low work intensity", 0.241451, false),
    r("TOT_TUTTI", "Number of individuals in the household", 0.216393, false),
    r("LAVPRI", "Employment status or occupation type", 0.143095, false),
    r("ETAINT", "Respondent's age", 0.127812, false),
    r("TF", "Type of family", 0.117092, false),
    r("QUINTI_EU", "Quintile in the European Union economic ranking", 0.026564, false),
];

const fn r(
    acronym: &'static str,
    description: &'static str,
    score: f64,
    atypical: bool,
) -> ReferenceScore {
    ReferenceScore {
        acronym,
        description,
        score,
        atypical,
    }
}

/// Size of the survey subsample the reference scores come from.
pub const EUSILC_ROWS: usize = 1925;

type Table = (&'static str, VariableKind, &'static [&'static str], &'static [f64]);

const YES_NO_NA: &[&str] = &["Yes", "No", "Not applicable"];
const COUNTS_0_4: &[&str] = &["0", "1", "2", "3", "4 or more"];

// Same order as REFERENCE_SCORES.
const MARGINALS: [Table; 19] = {
    use VariableKind::*;
    [
        ("VIFAM", Nominal, &["Yes", "No, only for a period", "No"], &[0.992, 0.008, 0.0]),
        ("SECITT", Nominal, YES_NO_NA, &[0.0171, 0.9829, 0.0]),
        ("SEV_MAT_DEPRIV", Nominal, YES_NO_NA, &[0.0301, 0.0, 0.9699]),
        (
            "TIPSCU",
            Nominal,
            &[
                "Kindergarten",
                "Nursery",
                "Primary school",
                "Lower secondary school",
                "Upper secondary school",
                "No schooling",
                "Not applicable",
            ],
            &[0.019, 0.024, 0.036, 0.017, 0.004, 0.007, 0.893],
        ),
        ("CITTADX", Binary, &["Yes", "No"], &[0.954, 0.047]),
        ("NCITT", Nominal, YES_NO_NA, &[0.9257, 0.0473, 0.027]),
        ("ITA", Nominal, YES_NO_NA, &[0.9361, 0.0639, 0.0]),
        ("RISKPOV", Nominal, &["Not at risk", "At risk", "Not applicable"], &[0.8191, 0.1525, 0.0284]),
        ("RAGA017", Ordinal, COUNTS_0_4, &[0.6955, 0.2131, 0.0653, 0.02, 0.0061]),
        ("DON1555", Ordinal, COUNTS_0_4, &[0.6561, 0.2278, 0.0791, 0.0275, 0.0095]),
        ("POV_SOC_EXCL", Binary, &["No", "Yes"], &[0.8442, 0.1558]),
        (
            "FONTERED",
            Nominal,
            &[
                "Salaried employment",
                "Self-employment",
                "Pensions",
                "Support from cohabiting family members",
                "Other",
            ],
            &[0.5669, 0.251, 0.1111, 0.0492, 0.0218],
        ),
        (
            "STACIV",
            Nominal,
            &["Married (living with spouse)", "Single", "Widowed", "Divorced", "Separated"],
            &[0.552, 0.2535, 0.1164, 0.0535, 0.0246],
        ),
        ("LOW_WORK_INT", Nominal, &["No", "Not applicable", "Yes"], &[0.6646, 0.245, 0.0904]),
        (
            "TOT_TUTTI",
            Ordinal,
            &["2", "3", "1", "4", "5", "6", "7", "8", "9 or more"],
            &[0.3671, 0.2348, 0.1501, 0.096, 0.0614, 0.0392, 0.0251, 0.016, 0.0103],
        ),
        (
            "LAVPRI",
            Nominal,
            &["Employed", "Retired", "Student", "Homemaker", "Unemployed", "Other inactive"],
            &[0.3925, 0.2483, 0.1571, 0.0994, 0.0629, 0.0398],
        ),
        ("ETAINT", Ordinal, &["32-64", "Over 64", "16-32", "0-16"], &[0.483, 0.2738, 0.1552, 0.088]),
        (
            "TF",
            Nominal,
            &[
                "Couple with children",
                "Couple without children",
                "Single person",
                "Single parent",
                "Extended family",
                "Multiple nuclei",
                "Cohabiting non-relatives",
                "Other",
            ],
            &[0.3029, 0.2177, 0.1564, 0.1124, 0.0808, 0.0581, 0.0417, 0.03],
        ),
        (
            "QUINTI_EU",
            Ordinal,
            &["First", "Second", "Third", "Fourth", "Fifth"],
            &[0.2912, 0.2361, 0.1915, 0.1553, 0.1259],
        ),
    ]
};

/// The nineteen marginals, in the order of [`REFERENCE_SCORES`].
pub fn eusilc_marginals() -> Vec<Marginal> {
    MARGINALS
        .iter()
        .map(|(name, kind, cats, probs)| {
            let spec = VariableSpec::new(*name, cats.iter().copied(), *kind)
                .expect("static spec is valid");
            Marginal::new(spec, probs.to_vec()).expect("static marginal is valid")
        })
        .collect()
}

/// Rows drawn from [`eusilc_marginals`] with unit weights.
pub fn eusilc_fixture(n: usize, seed: u64) -> Result<CategoricalDataset> {
    crate::dataset::generate_fixture(&eusilc_marginals(), n, seed)
}

/// A dataset with some rows overwritten, and which rows they are.
#[derive(Debug, Clone)]
pub struct Injected {
    pub data: CategoricalDataset,
    /// Sorted row ids of the overwritten rows.
    pub rows: Vec<usize>,
}

/// Overwrites `count` random rows so each of `variables` takes its rarest
/// observed category (ties go to the highest code).
pub fn inject_anomalies(
    d: &CategoricalDataset,
    variables: &[usize],
    count: usize,
    seed: u64,
) -> Result<Injected> {
    let n = d.n_rows();
    let p = d.n_vars();
    if count > n {
        return Err(crate::Error::OversizedSample {
            requested: count,
            available: n,
        });
    }
    for &v in variables {
        if v >= p {
            return Err(crate::Error::BadVariableIndex { index: v, count: p });
        }
    }
    let mut rng = rng::seeded(seed);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    rows.truncate(count);
    rows.sort_unstable();

    let mut codes = d.codes().to_vec();
    for &v in variables {
        let k = d.specs()[v].category_count();
        let mut counts = vec![0usize; k];
        for c in d.column(v) {
            counts[c as usize] += 1;
        }
        let rare = (0..k)
            .filter(|&c| counts[c] > 0)
            .min_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .unwrap_or(k - 1) as u32;
        for &i in &rows {
            codes[i * p + v] = rare;
        }
    }
    let data = CategoricalDataset::new(d.specs().to_vec(), codes, d.weights().to_vec())?;
    Ok(Injected { data, rows })
}

/// Overwrites `count` random rows so every variable takes a category drawn
/// uniformly from the rarer half of its observed categories.
pub fn scatter_rare(d: &CategoricalDataset, count: usize, seed: u64) -> Result<Injected> {
    let n = d.n_rows();
    let p = d.n_vars();
    if count > n {
        return Err(crate::Error::OversizedSample {
            requested: count,
            available: n,
        });
    }
    let mut rng = rng::seeded(seed);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    rows.truncate(count);
    rows.sort_unstable();

    let mut codes = d.codes().to_vec();
    for v in 0..p {
        let k = d.specs()[v].category_count();
        let mut counts = vec![0usize; k];
        for c in d.column(v) {
            counts[c as usize] += 1;
        }
        let mut seen: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
        seen.sort_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
        seen.truncate((seen.len() / 2).max(1));
        for &i in &rows {
            codes[i * p + v] = seen[rng.random_range(0..seen.len())] as u32;
        }
    }
    let data = CategoricalDataset::new(d.specs().to_vec(), codes, d.weights().to_vec())?;
    Ok(Injected { data, rows })
}

/// Rows with a planted group structure and the group of each row.
#[derive(Debug, Clone)]
pub struct Blobs {
    pub data: CategoricalDataset,
    pub truth: Vec<usize>,
}

/// `k` groups of `size` rows over `p` variables with `categories` levels.
///
/// Group `g` is built around a center whose every coordinate is `g`, so
/// centers sit at Hamming distance `p` from each other. Each cell is
/// replaced with a uniformly drawn other level with probability `noise`.
pub fn categorical_blobs(
    k: usize,
    size: usize,
    p: usize,
    categories: usize,
    noise: f64,
    seed: u64,
) -> Result<Blobs> {
    if k > categories || categories < 2 || k == 0 || size == 0 || p == 0 {
        return Err(crate::Error::InvalidConfig(format!(
            "blobs need 1 <= k <= categories, categories >= 2, size and p >= 1 \
             (k = {k}, categories = {categories})"
        )));
    }
    let specs = level_specs(p, categories);
    let mut rng = rng::seeded(seed);
    let mut codes = Vec::with_capacity(k * size * p);
    let mut truth = Vec::with_capacity(k * size);
    for g in 0..k {
        for _ in 0..size {
            for _ in 0..p {
                let mut c = g as u32;
                if rng.random::<f64>() < noise {
                    let other = rng.random_range(0..categories as u32 - 1);
                    c = if other >= c { other + 1 } else { other };
                }
                codes.push(c);
            }
            truth.push(g);
        }
    }
    let data = CategoricalDataset::new(specs, codes, vec![1.0; k * size])?;
    Ok(Blobs { data, truth })
}

/// Number of repeated patterns in [`separable_fixture`].
pub const SEPARABLE_PATTERNS: usize = 4;

/// `n_typical` rows cycling through four constant patterns (every code `g`
/// for `g < 4`), followed by `n_atypical` rows drawn uniformly from codes
/// `4..8`. Truth is `true` for the second block.
///
/// With at least ten times as many typical rows as atypical ones, the
/// atypical rows are isolated singletons whose directions carry the
/// smallest kernel eigenvalues.
pub fn separable_fixture(
    n_typical: usize,
    n_atypical: usize,
    p: usize,
    seed: u64,
) -> Result<(CategoricalDataset, Vec<bool>)> {
    let levels = 2 * SEPARABLE_PATTERNS;
    let specs = level_specs(p, levels);
    let mut rng = rng::seeded(seed);
    let n = n_typical + n_atypical;
    let mut codes = Vec::with_capacity(n * p);
    for i in 0..n_typical {
        codes.extend(core::iter::repeat_n((i % SEPARABLE_PATTERNS) as u32, p));
    }
    for _ in 0..n_atypical * p {
        codes.push(rng.random_range(SEPARABLE_PATTERNS as u32..levels as u32));
    }
    let truth = (0..n).map(|i| i >= n_typical).collect();
    Ok((CategoricalDataset::new(specs, codes, vec![1.0; n])?, truth))
}

/// Rows of [`separable_fixture`]'s typical block, followed by `groups` blobs
/// of `group_size` atypical rows. Blobs come from [`categorical_blobs`] with
/// levels permuted per variable and shifted past the typical codes, so
/// centers differ in every variable and are not constant rows. Truth holds the blob of each atypical row and `None` for typical
/// rows.
pub fn subgroup_fixture(
    n_typical: usize,
    groups: usize,
    group_size: usize,
    p: usize,
    noise: f64,
    seed: u64,
) -> Result<(CategoricalDataset, Vec<Option<usize>>)> {
    if groups < 2 || group_size == 0 || p == 0 || !(0.0..=1.0).contains(&noise) {
        return Err(crate::Error::InvalidConfig(format!(
            "subgroups need at least 2 groups, nonempty groups, p >= 1 and noise in [0, 1]"
        )));
    }
    let levels = groups.max(SEPARABLE_PATTERNS);
    let blobs = categorical_blobs(groups, group_size, p, levels, noise, seed)?;
    let n = n_typical + groups * group_size;
    let mut codes = Vec::with_capacity(n * p);
    for i in 0..n_typical {
        codes.extend(core::iter::repeat_n((i % SEPARABLE_PATTERNS) as u32, p));
    }
    let mut rng = rng::seeded(seed ^ 0x5eed);
    let perms: Vec<Vec<u32>> = (0..p)
        .map(|_| {
            let mut perm: Vec<u32> = (0..levels as u32).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect();
    codes.extend(
        blobs.data.codes().iter().enumerate().map(|(i, &c)| perms[i % p][c as usize] + SEPARABLE_PATTERNS as u32),
    );
    let specs = level_specs(p, SEPARABLE_PATTERNS + levels);
    let truth = core::iter::repeat_n(None, n_typical).chain(blobs.truth.into_iter().map(Some)).collect();
    Ok((CategoricalDataset::new(specs, codes, vec![1.0; n])?, truth))
}

fn level_specs(p: usize, categories: usize) -> Vec<VariableSpec> {
    let labels: Vec<String> = (0..categories).map(|c| format!("L{c}")).collect();
    (0..p)
        .map(|j| {
            VariableSpec::new(format!("V{}", j + 1), labels.iter().cloned(), VariableKind::Nominal)
                .expect("generated labels are unique")
        })
        .collect()
}

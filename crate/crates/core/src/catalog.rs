//! Fitted parameter curves, sample tables and default grids for the standard problems.

use crate::algebra::{rat, AlphaPoly, MomentSymbol};
use crate::calculus::EntropyKind;
use crate::sos::{default_gram_basis, default_slacks, FittedParams, GramBasisElement};

/// Free parameters of the k = 4 Rényi problem, in the order they are listed.
pub const RENYI4_FREE: [&str; 42] = [
    "b13", "b14", "b15", "b16", "b18", "b19", "b1_10", "b23", "b24", "b25", "b26", "b27", "b28", "b29", "b2_10", "b35",
    "b36", "b38", "b39", "b3_10", "b45", "b46", "b48", "b49", "b4_10", "b56", "b57", "b58", "b59", "b67", "b69",
    "b6_10", "b77", "b78", "b79", "b7_10", "b89", "b99", "c1", "c2", "c3", "c4",
];

pub const TSALLIS4_FREE: [&str; 8] = ["b13", "b14", "b15", "b23", "b24", "b25", "b35", "b45"];

/// Letter names used for the k = 3 Rényi free parameters.
pub const RENYI3_ALIASES: [(&str, &str); 5] = [("a", "b24"), ("b", "b13"), ("c", "b23"), ("d", "c1"), ("e", "c2")];

pub const RENYI2_FREE: [&str; 3] = ["b12", "b13", "b23"];

/// Free parameter names when the default basis and slacks are used.
pub fn paper_free_parameters(
    order: u32,
    kind: EntropyKind,
    basis: &[GramBasisElement],
    slacks: &[Vec<MomentSymbol>],
) -> Option<Vec<String>> {
    let default_basis = default_gram_basis(order, kind).ok()?;
    if basis != default_basis.as_slice() || slacks != default_slacks(order, kind).as_slice() {
        return None;
    }
    let names: Vec<&str> = match (order, kind) {
        (2, EntropyKind::Tsallis) | (3, EntropyKind::Tsallis) => return None,
        (2, _) => RENYI2_FREE.to_vec(),
        (3, _) => RENYI3_ALIASES.iter().map(|(_, v)| *v).collect(),
        (4, EntropyKind::Tsallis) => TSALLIS4_FREE.to_vec(),
        (4, _) => RENYI4_FREE.to_vec(),
        _ => return None,
    };
    Some(names.into_iter().map(String::from).collect())
}

/// Resolves a k = 3 letter alias; other names pass through.
pub fn resolve_alias(name: &str) -> &str {
    RENYI3_ALIASES.iter().find(|(a, _)| *a == name).map(|(_, v)| *v).unwrap_or(name)
}

fn params(entries: &[(&str, AlphaPoly)], degree: usize, den: u64) -> FittedParams {
    FittedParams {
        params: entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        fit_degree: degree,
        round_denominator: den,
    }
}

fn tenths(cs: &[i64]) -> AlphaPoly {
    AlphaPoly::from_ints_over(cs, 10)
}

/// Degree-4 curves for k = 3 Rényi on (0.5, 0.84).
pub fn renyi3_hat() -> FittedParams {
    params(
        &[
            ("b24", tenths(&[3, 64, -87, 11, 8])),
            ("b13", tenths(&[94, -249, 491, -486, 177])),
            ("b23", tenths(&[-257, 1146, -2626, 2622, -942])),
            ("c1", tenths(&[0, -2, 6, -4])),
            ("c2", tenths(&[5, -23, 56, -37])),
        ],
        4,
        10,
    )
}

/// Linear choice for k = 3 Rényi on (0.83, 1].
pub fn renyi3_tilde() -> FittedParams {
    params(
        &[
            ("b24", AlphaPoly::from_ints(&[4, -4])),
            ("b13", AlphaPoly::from_ints_over(&[12, -7], 2)),
            ("b23", AlphaPoly::from_ints(&[-12, 7])),
            ("c1", AlphaPoly::zero()),
            ("c2", AlphaPoly::from_ints_over(&[3, -3], 2)),
        ],
        1,
        10,
    )
}

const RENYI4_HAT: [(&str, [i64; 7]); 42] = [
    ("b13", [-91252, 35904, 35890, -19791, -9164, 10537, -2361]),
    ("b14", [189476, 23039, -175141, 41344, 44217, -27814, 5007]),
    ("b15", [-180930, 305354, -217895, 36990, 58957, -39666, 7379]),
    ("b16", [250345, -840213, 1015652, -308670, -284395, 229172, -46186]),
    ("b18", [-3101, 132016, -326706, 134523, 93089, -87288, 18566]),
    ("b19", [-905294, 3493036, -4491592, 1464337, 1256145, -1066012, 224800]),
    ("b1_10", [-167116, 229222, 162008, -239860, -53641, 132827, -38420]),
    ("b23", [105908, 97501, -265476, 87805, 72522, -58267, 11928]),
    ("b24", [-346450, 119563, 121389, -5240, -27137, -2197, 2547]),
    ("b25", [473201, -1035341, 872198, -167048, -235129, 159936, -29918]),
    ("b26", [-218012, 774319, -1053192, 383600, 300441, -268841, 56616]),
    ("b27", [587831, -1997272, 2510957, -863328, -699623, 631534, -137285]),
    ("b28", [-157085, 154690, 317156, -243313, -104416, 128911, -29406]),
    ("b29", [1225754, -5024686, 6827844, -2392199, -1919021, 1705479, -364792]),
    ("b2_10", [531222, -1137657, 411707, 283843, -85384, -101700, 39106]),
    ("b35", [164610, -232680, 71531, 35584, -14442, -5843, 2282]),
    ("b36", [-72349, 183502, -209314, 69998, 58837, -51981, 11058]),
    ("b38", [-65485, 191390, -102360, -16302, 21592, -4711, 334]),
    ("b39", [-237774, 646429, -500069, 42196, 118614, -73719, 17191]),
    ("b3_10", [130292, -402176, 344316, -35571, -88379, 46327, -7687]),
    ("b45", [-555060, 1103729, -782340, 63500, 203177, -104028, 16589]),
    ("b46", [256607, -750153, 903638, -303021, -253643, 222514, -47270]),
    ("b48", [-47232, 359306, -852339, 410441, 259946, -252015, 52435]),
    ("b49", [-776042, 3211664, -4564779, 1705665, 1309323, -1178244, 246089]),
    ("b4_10", [146608, -674489, 1225886, -591053, -358918, 386564, -87940]),
    ("b56", [-212195, 621958, -650747, 160209, 177993, -130945, 25633]),
    ("b57", [1636258, -4762460, 4731637, -1069804, -1286924, 910874, -172598]),
    ("b58", [373592, -1191822, 1381783, -404760, -386732, 304993, -60278]),
    ("b59", [849263, -2834446, 3316064, -996486, -926530, 748482, -150180]),
    ("b67", [247305, -846256, 853751, -149831, -228476, 137913, -23938]),
    ("b69", [-490805, 1729089, -2070698, 656732, 569796, -495499, 107130]),
    ("b6_10", [-34696, -24941, 265660, -197466, -82675, 117867, -29069]),
    ("b77", [1963506, -8820363, 12481179, -4438798, -3447795, 3192710, -717188]),
    ("b78", [-798409, 2258254, -1983151, 283227, 533372, -294422, 41938]),
    ("b79", [3003706, -11639204, 14866060, -4806471, -4067396, 3590054, -793636]),
    ("b7_10", [2167103, -5896234, 5186510, -1007159, -1383214, 957062, -178679]),
    ("b89", [1520755, -5407036, 6563579, -2113353, -1818437, 1576022, -336478]),
    ("b99", [7741109, -28812524, 35525537, -11166017, -9616108, 8519970, -1922915]),
    ("c1", [8489, -61368, 103126, -43353, -28584, 29984, -7198]),
    ("c2", [33383, -160476, 232596, -88736, -63744, 63678, -15070]),
    ("c3", [-217390, 740690, -859895, 251505, 238219, -191600, 39123]),
    ("c4", [-194197, 567924, -575575, 141205, 159513, -114845, 20978]),
];

/// Degree-6 curves for k = 4 Rényi on (0.93, 1.76).
pub fn renyi4_hat() -> FittedParams {
    let e: Vec<(&str, AlphaPoly)> = RENYI4_HAT.iter().map(|(n, c)| (*n, AlphaPoly::from_ints_over(c, 10000))).collect();
    params(&e, 6, 10000)
}

/// Degree-2 curves for k = 4 Tsallis on (1.65, 1.98).
pub fn tsallis4_hat() -> FittedParams {
    let e = [
        ("b13", [-43159, 2316, 9631]),
        ("b14", [389887, -350246, 77641]),
        ("b15", [-105282, 101670, -24505]),
        ("b23", [281922, -283833, 71413]),
        ("b24", [-643827, 644561, -161257]),
        ("b25", [129980, -134523, 34731]),
        ("b35", [39405, -30388, 5338]),
        ("b45", [-63338, 10256, 10729]),
    ];
    let e: Vec<(&str, AlphaPoly)> = e.iter().map(|(n, c)| (*n, AlphaPoly::from_ints_over(c, 10000))).collect();
    params(&e, 2, 10000)
}

/// Curves vanishing at α = 2 for k = 4 Tsallis on (1.97, 2].
pub fn tsallis4_tilde() -> FittedParams {
    let e = [
        ("b13", 42163),
        ("b14", -36667),
        ("b15", 3155),
        ("b23", 7699),
        ("b24", -9191),
        ("b25", 6194),
        ("b35", -10374),
        ("b45", 56793),
    ];
    let e: Vec<(&str, AlphaPoly)> =
        e.iter().map(|(n, c)| (*n, AlphaPoly::from_ints_over(&[-2 * c, *c], 10000))).collect();
    params(&e, 1, 10000)
}

/// Solved values of the k = 3 parameter `a` (that is, b24).
pub const L1: [(f64, f64); 7] = [
    (0.4, 1.58125),
    (0.5, 1.53958),
    (0.6, 1.38319),
    (0.7, 1.12931),
    (0.8, 0.800784),
    (0.9, 0.414932),
    (1.0, 0.000135571),
];

/// Solved values of b13 for k = 4 Rényi.
pub const L2: [(f64, f64); 6] =
    [(0.92, -4.430679), (1.1, -3.530372), (1.28, -2.677838), (1.46, -1.853103), (1.64, -1.036544), (1.81, -0.273122)];

/// Solved values of b13 for k = 4 Tsallis, with the α = 2 point.
pub const L3: [(f64, f64); 5] =
    [(1.75, -0.961764), (1.85, -0.588612), (1.95, -0.206353), (1.99, -0.038556), (2.0, 0.0)];

pub const RENYI3_GRID: [f64; 7] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const RENYI4_GRID: [f64; 6] = [0.92, 1.1, 1.28, 1.46, 1.64, 1.81];
pub const TSALLIS4_GRID: [f64; 5] = [1.75, 1.85, 1.95, 1.99, 2.0];
pub const DEFAULT_ROUND_DENOMINATOR: u64 = 10000;

/// A printed parameter choice and the open interval it is claimed to certify.
#[derive(Clone, Debug)]
pub struct PrintedCase {
    pub name: &'static str,
    pub kind: EntropyKind,
    pub order: u32,
    pub params: FittedParams,
    pub interval: (crate::algebra::Rational, crate::algebra::Rational),
}

pub fn printed_cases() -> Vec<PrintedCase> {
    let case = |name, kind, order, params, lo: (i64, i64), hi: (i64, i64)| PrintedCase {
        name,
        kind,
        order,
        params,
        interval: (rat(lo.0, lo.1), rat(hi.0, hi.1)),
    };
    vec![
        case("renyi3-hat", EntropyKind::Renyi, 3, renyi3_hat(), (1, 2), (84, 100)),
        case("renyi3-tilde", EntropyKind::Renyi, 3, renyi3_tilde(), (83, 100), (1, 1)),
        case("renyi4-hat", EntropyKind::Renyi, 4, renyi4_hat(), (93, 100), (176, 100)),
        case("tsallis4-hat", EntropyKind::Tsallis, 4, tsallis4_hat(), (165, 100), (198, 100)),
        case("tsallis4-tilde", EntropyKind::Tsallis, 4, tsallis4_tilde(), (197, 100), (2, 1)),
    ]
}

/// Looks up a printed case by name.
pub fn printed_case(name: &str) -> Option<PrintedCase> {
    printed_cases().into_iter().find(|c| c.name == name)
}

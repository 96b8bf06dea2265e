use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubeforge_core::diagonal::{karoubi_converse, nonempty_sets_check, MapClass};
use cubeforge_core::report::Bounds;
use cubeforge_core::skeletal::pseudo_sections_unrestricted;
use cubeforge_core::*;

#[derive(Parser)]
#[command(name = "cubeforge", version, about = "Exhaustive checks of Reedy, skeletality and Eilenberg-Zilber structure on cube categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the report as JSON (without timings) to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Clone)]
struct SiteArg {
    /// Site alias (`plain`, `cs`, `dcsr`, ...) or fields (`c=both,s=1,r=0,d=0`).
    #[arg(long, default_value = "plain")]
    site: String,
}

#[derive(Args, Clone)]
struct MapArg {
    /// Vertex table `dom->cod:[t0,t1,...]`, or a word when `--from` is given.
    #[arg(long = "map", alias = "word")]
    maps: Vec<String>,
    /// Domain dimension, for maps given as words (`d1+ . p1`).
    #[arg(long)]
    from: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List Hom(□ⁿ, □ᵐ) by closure under the generators.
    Homs {
        #[command(flatten)]
        site: SiteArg,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = 2)]
        slack: usize,
    },
    /// Decide whether a map belongs to the site.
    Member {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
    },
    /// Degeneracy, face, isomorphism or neither.
    Classify {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
    },
    /// Degeneracy / face factorization of a map.
    Factor {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
    },
    /// A section of a degeneracy.
    Section {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
    },
    /// Pseudo-sections and dependency partition of a degeneracy.
    PseudoSections {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
    },
    /// Strong skeletality.
    Skeletal {
        #[command(flatten)]
        site: SiteArg,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
    },
    /// Generalized Reedy axioms.
    ReedyAxioms {
        #[command(flatten)]
        site: SiteArg,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
    },
    /// Splitting of idempotents.
    Idempotents {
        #[command(flatten)]
        site: SiteArg,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
    },
    /// Certify an absolute pushout of a span of two degeneracies.
    Pushout {
        #[command(flatten)]
        site: SiteArg,
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Eilenberg-Zilber property of the site.
    EzCheck {
        #[command(flatten)]
        site: SiteArg,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Unique EZ decompositions in a truncated cubical set; without a file,
    /// checks representables and the built-in quotients.
    Ezset {
        file: Option<PathBuf>,
        #[command(flatten)]
        site: SiteArg,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
    },
    /// Order-theoretic identification of the sites with diagonals.
    DiagSuite {
        /// Bound on intermediate lattice sizes in the factorization searches.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, default_value_t = 2)]
        slack: usize,
        /// Restrict to one diagonal site.
        #[arg(long)]
        site: Option<String>,
    },
    /// Every check at default bounds.
    ReportAll {
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 2)]
        slack: usize,
        #[arg(long)]
        bound: Option<usize>,
        /// Restrict to one site.
        #[arg(long)]
        site: Option<String>,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BOUND: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli.command) {
        Ok(mut report) => {
            print_report(&report);
            if let Some(path) = &cli.json {
                report.strip_timings();
                if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceBound(_) => EXIT_BOUND,
        Error::Syntax { .. }
        | Error::SlotOutOfRange { .. }
        | Error::BadTable(_)
        | Error::InvalidSite(_)
        | Error::DiagonalSite(_)
        | Error::NonDiagonalSite(_)
        | Error::DimensionMismatch { .. }
        | Error::DimensionTooLarge { .. }
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn print_report(report: &Report) {
    for c in &report.checks {
        match c.elapsed_ms {
            Some(ms) => println!("{}  ({ms} ms)", c.line()),
            None => println!("{}", c.line()),
        }
        for w in &c.witnesses {
            print_witness("witness", w);
        }
        for w in c.notes.iter().take(MAX_NOTES) {
            print_witness("note", w);
        }
        if c.notes.len() > MAX_NOTES {
            println!("    ({} more notes in the JSON report)", c.notes.len() - MAX_NOTES);
        }
    }
    let tag = if report.passed() { "PASS" } else { "FAIL" };
    println!("{tag}: {} of {} checks passed", report.checks.iter().filter(|c| c.status.is_pass()).count(), report.checks.len());
}

const MAX_NOTES: usize = 3;

fn print_witness(kind: &str, w: &Witness) {
    println!("    {kind}: {}", w.description);
    for m in &w.maps {
        println!("      {m}");
    }
    if let Some(r) = &w.repro {
        println!("      repro: {r}");
    }
}

fn parse_site(s: &str) -> Result<SiteConfig> {
    s.parse()
}

fn parse_maps(arg: &MapArg) -> Result<Vec<CubeMap>> {
    arg.maps
        .iter()
        .map(|text| match arg.from {
            Some(dom) if !text.contains("->") => evaluate(&parse(text, dom)?),
            _ => text.parse(),
        })
        .collect()
}

fn one_map(arg: &MapArg) -> Result<CubeMap> {
    let mut maps = parse_maps(arg)?;
    if maps.len() != 1 {
        return Err(Error::BadTable(format!("expected one --map, got {}", maps.len())));
    }
    Ok(maps.remove(0))
}

fn timed(f: impl FnOnce() -> Result<Check>) -> Result<Check> {
    let start = std::time::Instant::now();
    let mut c = f()?;
    c.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    Ok(c)
}

fn member_or_fail(cfg: &SiteConfig, f: &CubeMap, command: &str) -> Result<Option<Check>> {
    if is_member(cfg, f) {
        return Ok(None);
    }
    let mut c = Check::new(command).for_site(cfg);
    c.examined = 1;
    c.violation(Witness::new("not a morphism of the site").with_maps([f]).with_repro(format!("cubeforge member --site {cfg} --map '{f}'")));
    Ok(Some(c.finish(false, format!("{f} is not in {cfg}"))))
}

fn run(command: &Command) -> Result<Report> {
    match command {
        Command::Homs { site, from, to, slack } => {
            let cfg = parse_site(&site.site)?;
            let mut report = Report::new("homs", Some(cfg.to_string()), Bounds { slack: Some(*slack), ..Bounds::default() });
            let c = timed(|| {
                let homs = enumerate_homs(&cfg, *from, *to, *slack)?;
                for f in &homs.maps {
                    println!("{f}");
                }
                let mut c = Check::new("homs").for_site(cfg);
                c.examined = homs.maps.len() as u64;
                let complete = if homs.complete { "complete" } else { "not known to be saturated" };
                Ok(c.finish(false, format!("|Hom(□{from},□{to})| = {} ({complete})", homs.maps.len())))
            })?;
            report.push(c);
            Ok(report)
        }
        Command::Member { site, map } => {
            let cfg = parse_site(&site.site)?;
            let f = one_map(map)?;
            let mut report = Report::new("member", Some(cfg.to_string()), Bounds::default());
            let c = match member_or_fail(&cfg, &f, "member")? {
                Some(c) => c,
                None => {
                    let mut c = Check::new("member").for_site(cfg);
                    c.examined = 1;
                    c.finish(false, format!("{f} is in {cfg}"))
                }
            };
            report.push(c);
            Ok(report)
        }
        Command::Classify { site, map } => single_map(site, map, "classify", |s, f| {
            let class = classify(s, f)?;
            Ok(Check::new("classify").for_site(s.cfg()).finish(false, format!("{f} is {class:?}")))
        }),
        Command::Factor { site, map } => single_map(site, map, "factor", |s, f| {
            let Factorization { q, i } = factorize(s, f)?;
            let mut c = Check::new("factor").for_site(s.cfg());
            c.note(Witness::new("degeneracy then face").with_maps([&q, &i]));
            Ok(c.finish(false, format!("{f} = {i} ∘ {q}")))
        }),
        Command::Section { site, map } => single_map(site, map, "section", |s, f| {
            let mut c = Check::new("section").for_site(s.cfg());
            c.examined = 1;
            let summary = match find_section(s, f)? {
                Some(sec) => format!("{sec} is a section of {f}"),
                None => {
                    c.violation(Witness::new("no section in the site").with_maps([f]).with_repro(format!("cubeforge section --site {} --map '{f}'", s.cfg())));
                    format!("{f} has no section")
                }
            };
            Ok(c.finish(false, summary))
        }),
        Command::PseudoSections { site, map } => single_map(site, map, "pseudo-sections", |s, f| {
            let part = dependency_partition(s, f)?;
            let restricted = pseudo_sections(s, f)?;
            let all = pseudo_sections_unrestricted(s, f, f.dom())?;
            let mut c = Check::new("pseudo-sections").for_site(s.cfg());
            c.examined = all.len() as u64;
            for i in &restricted {
                c.note(Witness::new("pseudo-section").with_maps([i]));
            }
            Ok(c.finish(
                false,
                format!("{} pseudo-sections of dimension {}, parts {:?}, trivial {:?}", restricted.len(), f.cod(), part.parts, part.trivial),
            ))
        }),
        Command::Skeletal { site, max_dim } => site_check(site, "skeletal", *max_dim, |s| strong_skeletality_check(s, *max_dim)),
        Command::ReedyAxioms { site, max_dim } => site_check(site, "reedy-axioms", *max_dim, |s| verify_reedy_axioms(s, *max_dim)),
        Command::Idempotents { site, max_dim } => {
            site_check(site, "idempotents", *max_dim, |s| verify_idempotents_split(s, *max_dim))
        }
        Command::Pushout { site, map, levels } => {
            let cfg = parse_site(&site.site)?;
            let maps = parse_maps(map)?;
            let [f, g] = <[CubeMap; 2]>::try_from(maps)
                .map_err(|m| Error::BadTable(format!("pushout needs two --map arguments, got {}", m.len())))?;
            let s = Site::new(cfg)?;
            let mut report = Report::new("pushout", Some(cfg.to_string()), Bounds { levels: Some(*levels), ..Bounds::default() });
            report.push(timed(|| {
                let mut c = Check::new("pushout").for_site(cfg);
                c.examined = 1;
                let summary = match find_absolute_pushout(&s, &f, &g, *levels)? {
                    Some(cert) => {
                        c.note(Witness::new("cocone g', f'").with_maps([&cert.g_prime, &cert.f_prime]));
                        format!("absolute pushout through □{}, bijective at levels ≤ {levels}", cert.d)
                    }
                    None => {
                        c.violation(Witness::new("no cocone is a pushout at every level").with_maps([&f, &g]).with_repro(format!(
                            "cubeforge pushout --site {cfg} --map '{f}' --map '{g}' --levels {levels}"
                        )));
                        "no absolute pushout found".to_string()
                    }
                };
                Ok(c.finish(true, summary))
            })?);
            Ok(report)
        }
        Command::EzCheck { site, max_dim, levels } => {
            let cfg = parse_site(&site.site)?;
            let s = Site::new(cfg)?;
            let bounds = Bounds { max_dim: Some(*max_dim), levels: Some(*levels), ..Bounds::default() };
            let mut report = Report::new("ez-check", Some(cfg.to_string()), bounds);
            report.push(timed(|| Ok(ez_category_check(&s, *max_dim, *levels)?.0))?);
            Ok(report)
        }
        Command::Ezset { file, site, max_dim } => match file {
            Some(path) => {
                let x = TruncatedCubicalSet::load(path)?;
                let mut report = Report::new("ezset", Some(x.config().to_string()), Bounds { max_dim: Some(x.trunc()), ..Bounds::default() });
                report.push(timed(|| ez_uniqueness_check(&x))?);
                Ok(report)
            }
            None => {
                let cfg = parse_site(&site.site)?;
                let mut report = Report::new("ezset", Some(cfg.to_string()), Bounds { max_dim: Some(*max_dim), ..Bounds::default() });
                report.push(timed(|| ez_lemma_suite(cfg, *max_dim, 2))?);
                Ok(report)
            }
        },
        Command::DiagSuite { bound, slack, site } => {
            let sites = match site {
                Some(s) => vec![parse_site(s)?],
                None => SiteConfig::diagonal(),
            };
            let bounds = Bounds { slack: Some(*slack), bound: *bound, ..Bounds::default() };
            let mut report = Report::new("diag-suite", site.clone(), bounds);
            for c in diagonal_checks(&sites, *slack, *bound, site.is_none())? {
                report.push(c);
            }
            Ok(report)
        }
        Command::ReportAll { max_dim, levels, slack, bound, site } => {
            let chosen = site.as_deref().map(parse_site).transpose()?;
            let bounds = Bounds { max_dim: Some(*max_dim), levels: Some(*levels), slack: Some(*slack), bound: *bound };
            let mut report = Report::new("report-all", chosen.map(|c| c.to_string()), bounds);
            for cfg in SiteConfig::non_diagonal().into_iter().filter(|c| chosen.is_none_or(|x| x == *c)) {
                let s = Site::new(cfg)?;
                report.push(timed(|| verify_reedy_axioms(&s, *max_dim))?);
                report.push(timed(|| strong_skeletality_check(&s, *max_dim))?);
                report.push(timed(|| Ok(ez_category_check(&s, *max_dim, *levels)?.0))?);
                report.push(timed(|| split_epi_equivalences_check(&s, *max_dim))?);
                report.push(timed(|| verify_idempotents_split(&s, *max_dim))?);
                report.push(timed(|| plus_monomorphism_check(&s, *max_dim))?);
                report.push(timed(|| ez_lemma_suite(cfg, *max_dim, 2))?);
            }
            let diag: Vec<SiteConfig> = SiteConfig::diagonal().into_iter().filter(|c| chosen.is_none_or(|x| x == *c)).collect();
            for c in diagonal_checks(&diag, *slack, *bound, chosen.is_none())? {
                report.push(c);
            }
            Ok(report)
        }
    }
}

fn single_map(site: &SiteArg, map: &MapArg, command: &str, f: impl FnOnce(&Site, &CubeMap) -> Result<Check>) -> Result<Report> {
    let cfg = parse_site(&site.site)?;
    let m = one_map(map)?;
    let mut report = Report::new(command, Some(cfg.to_string()), Bounds::default());
    if let Some(c) = member_or_fail(&cfg, &m, command)? {
        report.push(c);
        return Ok(report);
    }
    let s = Site::new(cfg)?;
    report.push(timed(|| f(&s, &m))?);
    Ok(report)
}

fn site_check(site: &SiteArg, command: &str, max_dim: usize, f: impl FnOnce(&Site) -> Result<Check>) -> Result<Report> {
    let cfg = parse_site(&site.site)?;
    let s = Site::new(cfg)?;
    let mut report = Report::new(command, Some(cfg.to_string()), Bounds { max_dim: Some(max_dim), ..Bounds::default() });
    report.push(timed(|| f(&s))?);
    Ok(report)
}

/// Identification, idempotents and Karoubi images per diagonal site; the
/// site-independent order-theoretic checks when `global` is set.
fn diagonal_checks(sites: &[SiteConfig], slack: usize, bound: Option<usize>, global: bool) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &cfg in sites {
        if !cfg.diagonals {
            return Err(Error::NonDiagonalSite(cfg.to_string()));
        }
        let s = Site::new(cfg)?;
        for (n, m) in [(1, 1), (2, 1), (2, 2)] {
            out.push(timed(|| identify_diagonal_site(&cfg, n, m, slack))?);
        }
        out.push(timed(|| verify_idempotents_split(&s, 2))?);
        out.push(timed(|| Ok(karoubi_images(&s, 2)?.0))?);
        if MapClass::for_site(&cfg).is_some() {
            out.push(timed(|| karoubi_converse(&cfg, 5))?);
        }
    }
    if global {
        out.push(timed(|| dedekind_agreement(3, 2, slack))?);
        let (b, c) = bound.map_or((12, 10), |b| (b, b));
        out.push(timed(diagonal::quotient_nonlattice_check)?);
        out.push(timed(|| diagonal::lattice_factorization_check(b))?);
        out.push(timed(|| diagonal::distributive_factorization_check(c))?);
        out.push(timed(|| nonempty_sets_check(4))?);
    }
    Ok(out)
}

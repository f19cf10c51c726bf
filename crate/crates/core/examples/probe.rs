use std::time::Instant;

use semlab_core::corpus::generate_synthetic_corpus;
use semlab_core::encoder::{build_vocab, init_params};
use semlab_core::evaluation::{task_clustering, Distance};
use semlab_core::training::{
    batch_breakdown, sample_batch, train, train_val_split, validation_metrics, Objective,
    TrainConfig,
};
use semlab_core::{analysis, evaluation, rng};

fn main() {
    let corpus = generate_synthetic_corpus(200, 8, 40, 30, 7).unwrap();
    let config = TrainConfig {
        seed: 7,
        ..TrainConfig::default()
    };
    let (train_idx, val_idx) = train_val_split(&corpus, config.val_frac);
    println!("train {} / val {}", train_idx.len(), val_idx.len());

    let vocab = build_vocab(&corpus, config.min_count).unwrap();
    println!("vocab size {}", vocab.size());
    let params = init_params(
        vocab.size(),
        config.token_dim,
        config.hidden_dim,
        config.embed_dim,
        config.dropout,
        config.seed,
    )
    .unwrap();

    // Untrained validation metrics.
    let (s2s, s2d) =
        validation_metrics(&params, &vocab, &corpus, &val_idx, Distance::Euclidean).unwrap();
    println!("untrained val: s2s {s2s:.3} s2d {s2d:.3} (pool {})", val_idx.len());

    // Untrained clustering purity: train docs pool vs val docs test.
    let train_docs: Vec<_> = train_idx.iter().map(|&i| corpus.document(i).clone()).collect();
    let val_docs: Vec<_> = val_idx.iter().map(|&i| corpus.document(i).clone()).collect();
    let purity = task_clustering(&vocab, &params, &train_docs, &val_docs, 5, Distance::Euclidean)
        .unwrap()
        .raw_score;
    println!("untrained purity {purity:.3} (chance 0.125)");

    // Cosine initial loss on a sampled batch.
    let cos_cfg = TrainConfig {
        objective: Objective::CosineSoftmax,
        seed: 7,
        ..TrainConfig::default()
    };
    let mut srng = rng::stream(7, "sampling");
    let batch = sample_batch(&corpus, &train_idx, &cos_cfg, &mut srng).unwrap();
    let breakdown = batch_breakdown(&params, &vocab, &batch, &cos_cfg).unwrap();
    println!(
        "cosine initial loss {:.4} vs log(32) = {:.4}",
        breakdown.contrastive,
        (32.0f64).ln()
    );
    let mut losses = Vec::new();
    for _ in 0..20 {
        let b = sample_batch(&corpus, &train_idx, &cos_cfg, &mut srng).unwrap();
        losses.push(batch_breakdown(&params, &vocab, &b, &cos_cfg).unwrap().contrastive);
    }
    let lmin = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lmean = losses.iter().sum::<f64>() / losses.len() as f64;
    println!("cosine loss over 20 batches: mean {lmean:.4} min {lmin:.4} max {lmax:.4}");

    // Initial similarity statistics for the cosine objective.
    let mut sims = Vec::new();
    let mut diags = Vec::new();
    {
        use semlab_core::encoder::{embed_text as et};
        let anchors: Vec<Vec<f64>> = batch
            .iter()
            .map(|p| et(&vocab, &params, &p.anchor_text).unwrap())
            .collect();
        let positives: Vec<Vec<f64>> = batch
            .iter()
            .map(|p| et(&vocab, &params, &p.positive_text).unwrap())
            .collect();
        let cos = |a: &[f64], b: &[f64]| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (na * nb)
        };
        for i in 0..anchors.len() {
            for j in 0..positives.len() {
                let s = cos(&anchors[i], &positives[j]);
                if i == j {
                    diags.push(s);
                } else {
                    sims.push(s);
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let std = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };
    println!(
        "init sims: off-diag mean {:.3} std {:.3}; diag mean {:.3}",
        mean(&sims),
        std(&sims),
        mean(&diags)
    );

    // Untrained top-1 variance mass on document embeddings.
    let mut set = evaluation::EmbeddingSet::new("untrained", config.embed_dim);
    for doc in corpus.documents() {
        let text = evaluation::doc_text(doc);
        let emb = semlab_core::encoder::embed_text(&vocab, &params, &text).unwrap();
        set.push(doc.id.clone(), emb).unwrap();
    }
    let profile = analysis::variance_profile(&set).unwrap();
    let untrained_top1 = analysis::top_k_mass(&profile, 1).unwrap();
    println!("untrained top-1 mass {untrained_top1:.4}");

    if std::env::var("PROBE_TRAIN").is_err() {
        return;
    }

    // Train with defaults.
    let t0 = Instant::now();
    let outcome = train(&corpus, &config).unwrap();
    println!(
        "training took {:.1?}s, {} evals, best batch {}",
        t0.elapsed(),
        outcome.log.len(),
        outcome.best_batch
    );
    for rec in outcome.log.iter().take(4) {
        println!(
            "  batch {:>6} epoch {:>5} loss {:.4} s2s {:.3} s2d {:.3} best {}",
            rec.batch, rec.epoch, rec.loss, rec.val_rank_s2s, rec.val_rank_s2d, rec.best
        );
    }
    let best = outcome.log.iter().filter(|r| r.best).next_back().unwrap();
    println!(
        "best: batch {} s2s {:.3} s2d {:.3}",
        best.batch, best.val_rank_s2s, best.val_rank_s2d
    );

    // Trained purity.
    let trained_purity = task_clustering(
        &outcome.vocab,
        &outcome.best_params,
        &train_docs,
        &val_docs,
        5,
        Distance::Euclidean,
    )
    .unwrap()
    .raw_score;
    println!("trained purity {trained_purity:.3}");

    // Trained top-1 mass.
    let mut set = evaluation::EmbeddingSet::new("trained", config.embed_dim);
    for doc in corpus.documents() {
        let text = evaluation::doc_text(doc);
        let emb =
            semlab_core::encoder::embed_text(&outcome.vocab, &outcome.best_params, &text).unwrap();
        set.push(doc.id.clone(), emb).unwrap();
    }
    let profile = analysis::variance_profile(&set).unwrap();
    let trained_top1 = analysis::top_k_mass(&profile, 1).unwrap();
    println!("trained top-1 mass {trained_top1:.4} (untrained {untrained_top1:.4})");

    let mut last_set = evaluation::EmbeddingSet::new("trained-last", config.embed_dim);
    for doc in corpus.documents() {
        let text = evaluation::doc_text(doc);
        let emb =
            semlab_core::encoder::embed_text(&outcome.vocab, &outcome.last_params, &text).unwrap();
        last_set.push(doc.id.clone(), emb).unwrap();
    }
    let last_profile = analysis::variance_profile(&last_set).unwrap();
    println!(
        "trained-last top-1 mass {:.4}",
        analysis::top_k_mass(&last_profile, 1).unwrap()
    );

    // What is the trained PC1 axis? Correlate PC1 coordinates with per-doc
    // head-word fraction and with topic identity.
    let proj = analysis::pca_project_2d(&set).unwrap();
    let mut token_counts: std::collections::HashMap<String, usize> = Default::default();
    for doc in corpus.documents() {
        for t in semlab_core::encoder::word_tokens(&evaluation::doc_text(doc)) {
            *token_counts.entry(t).or_default() += 1;
        }
    }
    let mut by_count: Vec<(&String, &usize)> = token_counts.iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(a.1));
    let head: Vec<&str> = by_count.iter().take(12).map(|(t, _)| t.as_str()).collect();
    println!("top tokens: {head:?}");
    let head2: Vec<&str> = by_count
        .iter()
        .filter(|(t, _)| t.len() > 4)
        .take(2)
        .map(|(t, _)| t.as_str())
        .collect();
    println!("likely head words: {head2:?}");

    if std::env::var("PROBE_COSINE").is_ok() {
        let t0 = Instant::now();
        let cos_outcome = train(&corpus, &cos_cfg).unwrap();
        let cos_purity = task_clustering(
            &cos_outcome.vocab,
            &cos_outcome.best_params,
            &train_docs,
            &val_docs,
            5,
            Distance::Cosine,
        )
        .unwrap()
        .raw_score;
        println!(
            "cosine-trained purity {cos_purity:.3} vs euclid {trained_purity:.3} ({:.0?})",
            t0.elapsed()
        );
        println!(
            "cosine best batch {}, evals {}",
            cos_outcome.best_batch,
            cos_outcome.log.len()
        );
        for rec in cos_outcome.log.iter().rev().take(3) {
            println!(
                "  batch {:>6} loss {:.4} s2s {:.3} s2d {:.3} best {}",
                rec.batch, rec.loss, rec.val_rank_s2s, rec.val_rank_s2d, rec.best
            );
        }
        let mut norms = Vec::new();
        for doc in val_docs.iter() {
            let e = semlab_core::encoder::embed_text(
                &cos_outcome.vocab,
                &cos_outcome.best_params,
                &evaluation::doc_text(doc),
            )
            .unwrap();
            norms.push(e.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        println!(
            "cosine model doc norms: mean {:.4} min {:.4}",
            norms.iter().sum::<f64>() / norms.len() as f64,
            norms.iter().cloned().fold(f64::INFINITY, f64::min)
        );
        let cos_last_purity = task_clustering(
            &cos_outcome.vocab,
            &cos_outcome.last_params,
            &train_docs,
            &val_docs,
            5,
            Distance::Cosine,
        )
        .unwrap()
        .raw_score;
        println!("cosine last-checkpoint purity {cos_last_purity:.3}");

        // Purity trajectory: retrain with capped budgets to sample the curve.
        for cap in [500u64, 1000, 2000, 3000, 5000, 8000] {
            let cfg = TrainConfig {
                max_batches: Some(cap),
                patience: u64::MAX,
                ..cos_cfg.clone()
            };
            let out = train(&corpus, &cfg).unwrap();
            let p = task_clustering(
                &out.vocab,
                &out.last_params,
                &train_docs,
                &val_docs,
                5,
                Distance::Cosine,
            )
            .unwrap()
            .raw_score;
            let (s2s, s2d) = validation_metrics(
                &out.last_params,
                &out.vocab,
                &corpus,
                &val_idx,
                Distance::Cosine,
            )
            .unwrap();
            println!("  cosine@{cap}: purity {p:.3} s2s {s2s:.3} s2d {s2d:.3}");
        }
    }

    if std::env::var("PROBE_ABLATION").is_ok() {
        use semlab_core::training::TrainMode;
        for seed in [11u64, 12, 13] {
            let budget = TrainConfig {
                eval_every: 50,
                patience: 5,
                max_batches: Some(3000),
                seed,
                ..TrainConfig::default()
            };
            let mut scores = Vec::new();
            for mode in [TrainMode::Full, TrainMode::JustSummaries, TrainMode::SameInput] {
                let cfg = TrainConfig { mode, ..budget.clone() };
                let out = train(&corpus, &cfg).unwrap();
                let ta = semlab_core::evaluation::task_title_abstract(
                    &out.vocab,
                    &out.best_params,
                    &val_docs,
                    Distance::Euclidean,
                )
                .unwrap()
                .raw_score;
                let pur = task_clustering(
                    &out.vocab,
                    &out.best_params,
                    &train_docs,
                    &val_docs,
                    5,
                    Distance::Euclidean,
                )
                .unwrap()
                .raw_score;
                scores.push((format!("{mode:?}"), ta, pur));
            }
            println!("seed {seed}:");
            for (mode, ta, pur) in &scores {
                println!("  {mode:<14} title-abstract {ta:.3}  purity {pur:.3}");
            }
        }
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut topic_means: std::collections::HashMap<String, (f64, usize)> = Default::default();
    for (key, x, _) in &proj {
        let idx = corpus.doc_index(key).unwrap();
        let doc = corpus.document(idx);
        let tokens: Vec<String> =
            semlab_core::encoder::word_tokens(&evaluation::doc_text(doc)).collect();
        let head_frac =
            tokens.iter().filter(|t| head2.contains(&t.as_str())).count() as f64 / tokens.len() as f64;
        xs.push(head_frac);
        ys.push(*x);
        let e = topic_means
            .entry(doc.category.clone().unwrap())
            .or_insert((0.0, 0));
        e.0 += *x;
        e.1 += 1;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mx = mean(&xs);
    let my = mean(&ys);
    let cov: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ys.iter().map(|b| (b - my) * (b - my)).sum();
    println!("corr(PC1, head fraction) = {:.3}", cov / (vx * vy).sqrt());
    let between: f64 = topic_means
        .values()
        .map(|(s, n)| {
            let m = s / *n as f64;
            *n as f64 * (m - my) * (m - my)
        })
        .sum();
    println!("topic share of PC1 variance = {:.3}", between / vy);
}
